"""Watch the provability degree of P(c) close in on 1/3.

The theory says P(c) has falsity exactly 1/3.  Each pulled interval is
backed by checked proofs; the transposed update rule is shown last.
"""

from pathlib import Path

from pavelka.errors import InconsistentStream
from pavelka.kernel import TheoryHandle
from pavelka.parser import parse_formula, parse_theory
from pavelka.search import degree_stream

T = TheoryHandle.from_file(parse_theory((Path(__file__).parent / "data" / "toy.thy").read_text()))
phi = parse_formula("(P c)", T.signature)

st = degree_stream(T, phi)
last = None
for iv in st:
    if iv != last:
        print("interval", iv)
        last = iv
print("certificates:", sum(len(c) for c in st.certificates()), "checked proofs")

print("\nwith the printed (transposed) update rule:")
bad = degree_stream(T, phi, erratum=True)
try:
    last = None
    for iv in bad:
        if iv != last:
            print("interval", iv)
            last = iv
except InconsistentStream as e:
    print("stopped:", e)
