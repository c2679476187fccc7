import pytest
from hypothesis import settings

from lapdist.tree import from_edge_list

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# the 53-vertex worked example with five starlike vertices of weights 2, 3, 4, 6, 8
TBAR_EDGES = [
    (0, 1), (0, 8), (0, 43), (1, 2), (2, 18), (3, 4), (3, 19), (3, 43), (4, 5), (5, 6), (5, 31),
    (5, 33), (6, 7), (8, 9), (8, 10), (10, 11), (11, 12), (12, 13), (12, 15), (12, 17), (13, 14),
    (13, 36), (14, 35), (15, 16), (17, 23), (17, 25), (17, 27), (17, 29), (19, 42), (20, 21),
    (20, 41), (21, 22), (23, 24), (25, 26), (27, 28), (29, 30), (31, 32), (33, 34), (36, 37),
    (38, 39), (38, 42), (39, 40), (40, 41), (43, 44), (43, 49), (44, 45), (44, 47), (45, 46),
    (45, 48), (49, 50), (49, 51), (51, 52),
]


@pytest.fixture(scope="session")
def tbar():
    return from_edge_list(53, TBAR_EDGES)
