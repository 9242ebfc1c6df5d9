"""Context curation: nugget detection, clustering, and cluster ranking."""
