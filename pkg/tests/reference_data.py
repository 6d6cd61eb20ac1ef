"""Published reference statistics used as replay fixtures.

These are the externally published numbers for the 13-site Myanmar
deployment: recorded hours and sampled-clip counts per site, the
realized per-site train/val/test split of the 910 annotated clips, and
the 36 observed classes with their test-set instance counts and
per-class AP (in percent; None where the class had no test instances
and AP is undefined).
"""

SITE_HOURS = {
    "Bago_highway": 9,
    "Bago_rural": 17,
    "Bago_urban": 16,
    "Mandalay_1": 58,
    "Mandalay_2": 48,
    "Naypyitaw_1": 13,
    "Naypyitaw_2": 11,
    "NyaungU_rural": 21,
    "NyaungU_urban": 17,
    "Pakokku_urban": 19,
    "Pathein_rural": 3,
    "Pathein_urban": 12,
    "Yangon_II": 10,
}

SITE_SAMPLED_CLIPS = {
    "Bago_highway": 35,
    "Bago_rural": 67,
    "Bago_urban": 63,
    "Mandalay_1": 228,
    "Mandalay_2": 190,
    "Naypyitaw_1": 51,
    "Naypyitaw_2": 43,
    "NyaungU_rural": 83,
    "NyaungU_urban": 67,
    "Pakokku_urban": 75,
    "Pathein_rural": 12,
    "Pathein_urban": 47,
    "Yangon_II": 39,
}

SAMPLING_QUOTA = 1000

# Realized (train, val, test) counts of the 910 annotated clips.
SITE_SPLITS = {
    "Bago_highway": (24, 4, 7),
    "Bago_rural": (41, 6, 11),
    "Bago_urban": (44, 6, 13),
    "Mandalay_1": (159, 23, 45),
    "Mandalay_2": (111, 16, 31),
    "Naypyitaw_1": (36, 5, 10),
    "Naypyitaw_2": (30, 4, 9),
    "NyaungU_rural": (57, 8, 17),
    "NyaungU_urban": (47, 7, 13),
    "Pakokku_urban": (52, 8, 15),
    "Pathein_rural": (8, 1, 3),
    "Yangon_II": (27, 4, 8),
}

SPLIT_TOTALS = (636, 92, 182)

# (canonical label, test-set instance count, AP percent or None)
# ordered by published class number 1..36.
CLASS_RESULTS = [
    ("DHelmet", 27301, 84.5),
    ("DHelmetP1Helmet", 13748, 78.5),
    ("DNoHelmet", 10796, 75.4),
    ("DNoHelmetP1NoHelmet", 5736, 63.5),
    ("DHelmetP1NoHelmet", 2314, 20.4),
    ("DNoHelmetP1NoHelmetP2NoHelmet", 1050, 28.0),
    ("DNoHelmetP1Helmet", 511, 11.6),
    ("DHelmetP1NoHelmetP2Helmet", 420, 8.6),
    ("DHelmetP1NoHelmetP2NoHelmet", 442, 8.9),
    ("DNoHelmetP0NoHelmetP1NoHelmet", 514, 3.5),
    ("DHelmetP0NoHelmetP1Helmet", 466, 9.9),
    ("DNoHelmetP0NoHelmetP1NoHelmetP2NoHelmet", 277, 18.7),
    ("DHelmetP0NoHelmet", 369, 1.6),
    ("DNoHelmetP0NoHelmet", 183, 0.3),
    ("DHelmetP0NoHelmetP1NoHelmet", 0, None),
    ("DHelmetP1HelmetP2Helmet", 75, 5.1),
    ("DHelmetP0HelmetP1Helmet", 146, 4.2),
    ("DHelmetP0NoHelmetP1NoHelmetP2Helmet", 24, 1.6),
    ("DHelmetP0Helmet", 0, None),
    ("DHelmetP0NoHelmetP1NoHelmetP2NoHelmet", 27, 0.3),
    ("DNoHelmetP1NoHelmetP2Helmet", 0, None),
    ("DNoHelmetP1NoHelmetP2NoHelmetP3NoHelmet", 0, None),
    ("DHelmetP1HelmetP2NoHelmet", 0, None),
    ("DHelmetP1NoHelmetP2NoHelmetP3Helmet", 0, None),
    ("DHelmetP1NoHelmetP2NoHelmetP3NoHelmet", 70, 0.4),
    ("DHelmetP0HelmetP1NoHelmetP2Helmet", 0, None),
    ("DHelmetP0NoHelmetP1HelmetP2Helmet", 0, None),
    ("DNoHelmetP1HelmetP2Helmet", 0, None),
    ("DNoHelmetP0NoHelmetP1Helmet", 0, None),
    ("DHelmetP0HelmetP1NoHelmetP2NoHelmet", 0, None),
    ("DNoHelmetP0HelmetP1NoHelmet", 0, None),
    ("DNoHelmetP0NoHelmetP1NoHelmetP2NoHelmetP3NoHelmet", 0, None),
    ("DHelmetP0HelmetP1HelmetP2Helmet", 21, 0.0),
    ("DNoHelmetP0NoHelmetP1NoHelmetP2Helmet", 15, 0.0),
    ("DHelmetP0NoHelmetP1NoHelmetP2NoHelmetP3Helmet", 53, 0.0),
    ("DHelmetP0NoHelmetP1NoHelmetP2NoHelmetP3NoHelmet", 31, 0.0),
]

TEST_INSTANCE_TOTAL = 64589
PUBLISHED_WEIGHTED_MAP = 72.3        # percent, over all defined classes
PUBLISHED_SUBSET_WEIGHTED_MAP = 76.4  # percent, classes 1-5 and 7
SUBSET_CLASS_NUMBERS = (1, 2, 3, 4, 5, 7)
