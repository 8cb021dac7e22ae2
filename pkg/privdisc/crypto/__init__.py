"""Cryptographic building blocks: pairing groups, IBE, prefix encryption,
Diffie-Hellman, key derivation and AEAD."""
