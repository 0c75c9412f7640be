r"""
Folding a pair of settings into one vector
------------------------------------------
A comparison classifier sees one input per ordered pair of settings. Each
coordinate of the two settings is quantized to an integer code and the two
codes are bit-interleaved, first setting's bit leading, so the result has
the same dimension as a single setting and the pair can be read back.
"""
import numpy as np

from pairtune.induction import BITS, deinterleave, induce_pair, interleave, quantize

#%%
# Two 6-bit codes and their interleaving. Swapping the arguments changes the
# result, so the encoding keeps track of which setting came first.
a, b = 0b000100, 0b000101
print(f"{a:06b} , {b:06b} -> {interleave(a, b):012b}")
print(f"{b:06b} , {a:06b} -> {interleave(b, a):012b}")
print("decoded:", deinterleave(interleave(a, b)))

#%%
# Real coordinates use 26 bits per value, so one interleaved code has 52
# bits and fits a double exactly.
print("bits per coordinate:", BITS)
print("0.5 ->", quantize(0.5), "of", 2**BITS - 1)

#%%
# A whole pair of 3-d settings becomes one 3-d vector in [0, 1).
x1 = np.array([0.10, 0.75, 0.50])
x2 = np.array([0.90, 0.25, 0.50])
v = induce_pair(x1, x2)
print("induced:", v)

#%%
# Decoding the vector recovers both quantized settings.
z = np.round(v * 2.0 ** (2 * BITS)).astype(np.uint64)
first, second = deinterleave(z)
print("first :", first / (2**BITS - 1))
print("second:", second / (2**BITS - 1))
