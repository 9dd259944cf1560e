"""Continuity moduli become UL axioms; a broken structure fails both checks."""

from pathlib import Path

from pavelka.clbridge import CLTheory, reduce, ul_instances
from pavelka.parser import parse_theory
from pavelka.semantics import check_moduli, parse_structure, sentence_value

data = Path(__file__).parent / "data"
T = CLTheory.from_file(parse_theory((data / "lip.thy").read_text()))
print("reduced packs:", sorted(reduce(T).packs))
inst = ul_instances(T.signature, "P", 0, 4)
print(len(inst), "UL instances with denominators up to 4")

for name in ("lip3.str", "broken3.str"):
    M = parse_structure((data / name).read_text())
    res = check_moduli(M, T.signature.moduli)
    bad = [i for i in inst if sentence_value(M, i.formula) > 0]
    print(f"{name}: moduli ok={res.ok}, violated UL instances={len(bad)}")
    if bad:
        print("   first:", bad[0].comment())
    if not res.ok:
        print(f"   jump at {res.args}: eps={res.eps} q={res.q} r={res.r}")
