"""Which seeds admit a nontrivial LOCC move at a given gram choice."""

from __future__ import annotations

from symloc import locc
from symloc import qutrit_derog as qd
from symloc import stabilizer as st


def report(name: str, scene: locc.LoccScene) -> None:
    d = locc.weakly_isolated(scene)
    print(f"{name:>22}: isolated={d.isolated}  by {d.argument}")


def main() -> None:
    fam = st.ek_stabilizer(2, 4)
    report("E_2, n=4", locc.LoccScene(fam.seed, fam, tuple(locc.isolated_witness_ek(2, 4, (1.0, 2.0, 3.0, 4.0)))))
    fam = st.dicke_stabilizer(5, 2)
    report("Dicke(5,2)", locc.LoccScene(fam.seed, fam, tuple(locc.mub_isolated_witness(2, 5, [1.0, 2.0]))))
    for rep in qd.representatives(4):
        report(rep.id, qd.isolation_scene(rep))
    d = qd.psi_derog_isolation_report(samples=10)
    print(f"{'psi_derog (all grams)':>22}: isolated={d.isolated}  by {d.argument}")


if __name__ == "__main__":
    main()
