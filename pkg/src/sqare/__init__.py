"""sqare: multilingual LLM knowledge-conflict evaluation over RDF."""

__version__ = "0.1.0"
