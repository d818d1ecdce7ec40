"""
Coarse classes and instance statistics
======================================

Collapse the 23 layout classes onto the 9-class scheme and count instances
per class, including on a split built to the reference validation counts.
"""

# %%
from collections import Counter

from doclayout_tools import histogram, load_ground_truth, remap_dataset, to_coarse
from doclayout_tools.core import LayoutCategory
from doclayout_tools.synthetic import bundled_corpus, make_count_fixture

for c in LayoutCategory:
    print(f"{c.name:<16} -> {to_coarse(c).display}")

# %%
train = load_ground_truth(bundled_corpus()["train.json"])
coarse = remap_dataset(train)
print(Counter(a.category.display for a in coarse.annotations).most_common())

# %%
# The validation-sized split reproduces the reference counts exactly
hist = histogram(make_count_fixture("validation"))
print(hist.to_csv())
print("total", hist.total)
