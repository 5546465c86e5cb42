"""Fine-tuning harness over pronoun-pair exports."""

__version__ = "0.1.0"
