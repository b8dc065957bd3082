"""
Boxes, bisection and integer-labelled paving trees
==================================================

The building block of everything here: a box is split at the midpoint
of its first widest coordinate, the left child takes a half-open upper
facet, and the resulting binary tree is addressed with plain integers
(root 1, children 2n and 2n+1).
"""

import numpy as np

from rphist import Box, RPTree, bisect, bounding_box, children, contains, depth, parent

# A unit square, bisected once: the split runs down the first coordinate.
square = Box.from_bounds([0.0, 0.0], [1.0, 1.0])
left, right = bisect(square)
print("left child :", left.intervals[0], "x", left.intervals[1])
print("right child:", right.intervals[0], "x", right.intervals[1])

# A point exactly on the splitting hyperplane belongs to the right child.
p = (0.5, 0.3)
print("on the hyperplane:", contains(left, p), contains(right, p))

# Integer labels encode the root-to-node path in binary.
print("children of 1:", children(1), " children of 5:", children(5))
print("parent of 5:", parent(5), " depth of 5:", depth(5))

# A paving is a prefix-closed label set; cell boxes are recomputed from
# the labels, never stored.
tree = RPTree(square).split(1).split(2)
print("leaves:", tree.leaves())
for leaf in tree.leaves():
    box = tree.cell_box(leaf)
    print(f"  leaf {leaf}: volume {box.volume:.4g}")

# The leaf cells always partition the root box exactly.
total = sum(tree.cell_box(v).volume for v in tree.leaves())
print("sum of leaf volumes:", total)

# Labels are unbounded Python ints, so depth is not capped by a machine
# word; here is the cell at depth 80 down the leftmost spine.
deep = RPTree(Box.from_bounds([0.0], [1.0]))
label = 1
for _ in range(80):
    deep = deep.split(label)
    label *= 2
print("deep label bits:", label.bit_length(), " volume:", deep.cell_box(label).volume)

# The root box of a real run comes from the data, slightly padded so
# every point is strictly interior.
rng = np.random.default_rng(0)
pts = rng.standard_normal((1000, 2))
print("root box:", bounding_box(pts))
