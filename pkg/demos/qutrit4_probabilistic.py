"""Two-round 4-qutrit protocol whose one-round analogue cannot succeed.

The first round already splits the seed into two states with different
local spectra, so no single measurement layer lands in one class.
"""

from __future__ import annotations

from symloc import protocol_sim as ps


def main() -> None:
    proto = ps.qutrit4_probabilistic_protocol()
    print(f"p = {ps.QUTRIT4_P:.15f}, q = {ps.QUTRIT4_Q:.15f}")
    outs = ps.simulate(proto, completeness_tol=1e-9)
    for o, r in zip(outs, ps.leaf_residuals(outs, proto.declared_target)):
        print(f"  leaf {o.path}  p={o.probability:.6f}  residual={r:.1e}")
    cert = ps.qutrit4_depth1_certificate()
    print("after one round:", cert["intermediate_probabilities"])
    print(f"  spectral gap {cert['spectral_gap']:.4g}, monotone gap {cert['monotone_gap']:.4g}")


if __name__ == "__main__":
    main()
