"""Regenerates the synthetic total-energy records in this directory.

The energies are constructed, not computed: each defect's transition level
at supercell size L is eps_inf + c/L, so a 1/L extrapolation returns
eps_inf, the hybrid-functional level of the materials database.
"""

MU = {"C": -9.094, "Si": -5.425, "B": -6.678, "N": -8.318, "P": -5.411, "Al": -3.745}

HOSTS = {
    "diamond": dict(a0=3.568, bulk_per_atom=-9.094, species=["B", "C", "N", "P"], defects=[
        ("B_C", "B", "C", "acceptor", 0.35, 0.90),
        ("N_C", "N", "C", "donor", 5.37 - 1.80, 3.60),
        ("P_C", "P", "C", "donor", 5.37 - 0.47, 6.20)]),
    "3C-SiC": dict(a0=4.362, bulk_per_atom=-(9.094 + 5.425) / 2 - 0.31, species=["Al", "B", "C", "N", "Si"], defects=[
        ("B_C", "B", "C", "acceptor", 0.57, 1.20),
        ("N_C", "N", "C", "donor", 2.25 - 0.16, 0.90),
        ("Al_Si", "Al", "Si", "acceptor", 0.19, 1.60)]),
}

SIZES = [(216, 3), (512, 4), (1000, 5)]


def write_host(name, h):
    lines = [
        f"# Synthetic total energies for {name} supercells of 216, 512 and 1000 atoms.",
        "# Built so that the 1/L extrapolated charge transition levels equal the",
        "# hybrid-functional values of the materials database; levels are measured",
        "# from the VBM, whose eigenvalue is taken as zero. E_F = 0 at the VBM.",
        ",".join(["label", "q", "E_tot_eV", "natoms", "L_angstrom"] + [f"n_{s}" for s in h["species"]]),
    ]
    for natoms, k in SIZES:
        lines.append(",".join(["bulk", "0", f"{natoms * h['bulk_per_atom']:.9f}", str(natoms), f"{k * h['a0']:.3f}"]
                              + [""] * len(h["species"])))
    for label, add, rem, role, level, ef0 in h["defects"]:
        for natoms, k in SIZES:
            size = round(k * h["a0"], 3)
            bulk = natoms * h["bulk_per_atom"]
            reservoir = MU[add] - MU[rem]
            eps = level + (0.9 if role == "acceptor" else -0.9) / size
            ef_neutral = ef0 + 0.3 / size
            if role == "donor":
                states = [(1, ef_neutral - eps), (0, ef_neutral)]
            else:
                states = [(0, ef_neutral), (-1, ef_neutral + eps)]
            counts = ["1" if s == add else "-1" if s == rem else "0" for s in h["species"]]
            for q, ef in states:
                lines.append(",".join([label, str(q), f"{ef + bulk + reservoir:.9f}", str(natoms), f"{size:.3f}"] + counts))
    path = "diamond.csv" if name == "diamond" else "3C-SiC.csv"
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_chempots():
    with open("chempots.toml", "w") as f:
        f.write("# Elemental chemical potentials (eV per atom) paired with the synthetic\n"
                "# records in this directory. Illustrative, not first-principles outputs.\n\n[mu]\n")
        for k, v in MU.items():
            f.write(f"{k} = {v}\n")


if __name__ == "__main__":
    for name, h in HOSTS.items():
        write_host(name, h)
    write_chempots()
