"""Deterministic LOCC from |W> to a weighted W state, one party at a time."""

from __future__ import annotations

import sys

from symloc import protocol_sim as ps


def main(n: int = 4, p: float = 0.3) -> None:
    proto = ps.w_class_protocol(n, p)
    print(f"protocol {proto.name}: depth {proto.depth()}")
    print("completeness residuals:", [f"{r:.1e}" for r in proto.completeness_residuals()])
    outs = ps.simulate(proto)
    target = ps.w_target(n, p)
    for o, r in zip(outs, ps.leaf_residuals(outs, target)):
        print(f"  branch {o.path}  p={o.probability:.4f}  residual={r:.1e}")
    print("deterministic:", ps.is_deterministic(outs, target))


if __name__ == "__main__":
    main(*(float(a) if "." in a else int(a) for a in sys.argv[1:]))
