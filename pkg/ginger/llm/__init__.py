"""Text generation: prompts, providers, and the gateway."""
