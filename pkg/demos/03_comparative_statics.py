"""How the optimal price responds to scaling, mixing and shrinking towards the mean."""
from mrdprice.orders import statics_suite

EXP = lambda lam: {"family": "exponential", "params": {"lambda": lam}}
scenarios = [
    {"theorem": "lemma", "X1": EXP(2.0), "X2": EXP(1.0)},
    {"theorem": "size_i", "X": {"family": "gamma", "params": {"shape": 2, "scale": 1}}, "c": 3.0},
    {"theorem": "transform_iii", "X1": EXP(2.0), "X2": EXP(1.0), "p": 0.4},
    {"theorem": "mean_preserving", "X": EXP(1.0)},
    {"theorem": "cv", "X": EXP(1.0)},
]
for scn in scenarios:
    for row in statics_suite(scn):
        print(f"{row.theorem:16s} {row.transformation:34s} {row.price_relation:28s} "
              f"{row.status:10s} {row.prices}")
