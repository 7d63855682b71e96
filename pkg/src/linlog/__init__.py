"""Propositional linear logic workbench: proofs, stack programs and encodings."""
