"""Hand-curated molecules, each written as several distinct SMILES spellings.

Every tuple lists spellings of the same molecule under different atom
orders, ring-digit choices, or branch placements. Aromatic/Kekule forms are
never mixed (aromaticity is taken from the source, not perceived), so all
spellings in a row describe identical graphs.
"""

MULTI_SPELLING = [
    # benzene, including a %nn ring-closure spelling
    ("c1ccccc1", "c2ccccc2", "c1ccc(cc1)", "c%12ccccc%12"),
    # toluene
    ("Cc1ccccc1", "c1ccccc1C", "c1ccc(C)cc1"),
    # pyridine
    ("c1ccncc1", "n1ccccc1", "c1cnccc1"),
    # furan
    ("o1cccc1", "c1ccoc1", "c1occc1"),
    # pyrrole
    ("[nH]1cccc1", "c1cc[nH]c1", "c1[nH]ccc1"),
    # cyclohexane
    ("C1CCCCC1", "C2CCCCC2", "C1CCC(CC1)"),
    # phenol
    ("Oc1ccccc1", "c1ccccc1O", "c1ccc(O)cc1"),
    # chlorobenzene
    ("Clc1ccccc1", "c1ccccc1Cl", "c1ccc(Cl)cc1"),
    # aniline
    ("Nc1ccccc1", "c1ccccc1N", "c1ccc(N)cc1"),
    # styrene
    ("C=Cc1ccccc1", "c1ccccc1C=C", "c1ccc(C=C)cc1"),
    # benzoic acid
    ("OC(=O)c1ccccc1", "c1ccccc1C(=O)O", "c1ccc(C(O)=O)cc1"),
    # biphenyl
    ("c1ccccc1-c2ccccc2", "c1ccc(-c2ccccc2)cc1", "c2ccccc2-c1ccccc1"),
    # naphthalene
    ("c1ccc2ccccc2c1", "c1ccc2c(c1)cccc2", "c2ccc1ccccc1c2"),
    # methylcyclohexane
    ("CC1CCCCC1", "C1CCCCC1C", "C1CCC(C)CC1"),
    # benzyl phenyl ether
    ("c1ccccc1OCc2ccccc2", "C(Oc1ccccc1)c2ccccc2", "c1ccc(OCc2ccccc2)cc1"),
    # anisole
    ("COc1ccccc1", "c1ccccc1OC", "c1ccc(OC)cc1"),
    # thiophene
    ("s1cccc1", "c1ccsc1", "c1sccc1"),
    # pyrimidine
    ("c1cncnc1", "c1ncncc1", "n1cnccc1"),
    # cyclohexanone
    ("O=C1CCCCC1", "C1CCCCC1=O", "C1(=O)CCCCC1"),
    # 4-chlorotoluene
    ("Cc1ccc(Cl)cc1", "Clc1ccc(C)cc1", "c1cc(Cl)ccc1C"),
    # pyridinium-style charged aromatic nitrogen
    ("[n+]1ccccc1", "c1cc[n+]cc1", "c1[n+]cccc1"),
    # benzene hydrochloride-style two-component salt
    ("Cl.c1ccccc1", "c1ccccc1.Cl", "c2ccccc2.Cl"),
]
