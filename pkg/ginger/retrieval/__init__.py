"""First-pass retrieval: sparse and dense search and rank fusion."""
