"""Wire encodings and advertisement framings."""
