"""Privacy mechanism design under pointwise maximal leakage with worst-case utility guarantees."""
