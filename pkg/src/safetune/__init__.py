"""safetune: sanitize prompt-RTL corpora before LLM fine-tuning."""

__version__ = "0.1.0"
