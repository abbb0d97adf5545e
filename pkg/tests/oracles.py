"""Straight-line reference implementations used as test oracles.

Nothing here imports the package under test. Loops are explicit and slow on
purpose; they mirror the textbook description rather than the vectorized code.
"""

import math
from collections import deque

import numpy as np


def _px(img, y, x):
    h, w = img.shape
    return int(img[min(max(y, 0), h - 1), min(max(x, 0), w - 1)])


def reference_canny(img, low=100.0, high=200.0, norm="L1"):
    h, w = img.shape
    gx = [[0] * w for _ in range(h)]
    gy = [[0] * w for _ in range(h)]
    kx = ((-1, 0, 1), (-2, 0, 2), (-1, 0, 1))
    ky = ((-1, -2, -1), (0, 0, 0), (1, 2, 1))
    for y in range(h):
        for x in range(w):
            sx = sy = 0
            for j in range(3):
                for i in range(3):
                    v = _px(img, y + j - 1, x + i - 1)
                    sx += kx[j][i] * v
                    sy += ky[j][i] * v
            gx[y][x], gy[y][x] = sx, sy

    mag = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            if norm == "L1":
                mag[y][x] = abs(gx[y][x]) + abs(gy[y][x])
            else:
                mag[y][x] = math.sqrt(gx[y][x] ** 2 + gy[y][x] ** 2)

    def m(y, x):
        return mag[y][x] if 0 <= y < h and 0 <= x < w else 0

    thin = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            v = mag[y][x]
            if v == 0:
                continue
            # angle of the gradient in [0, 180) degrees, y axis pointing down
            ang = math.degrees(math.atan2(gy[y][x], gx[y][x])) % 180.0
            if ang < 22.5 or ang >= 157.5:
                ok = v > m(y, x - 1) and v >= m(y, x + 1)
            elif ang < 67.5:
                ok = v > m(y - 1, x - 1) and v > m(y + 1, x + 1)
            elif ang < 112.5:
                ok = v > m(y - 1, x) and v >= m(y + 1, x)
            else:
                ok = v > m(y - 1, x + 1) and v > m(y + 1, x - 1)
            thin[y][x] = ok

    out = np.zeros((h, w), dtype=bool)
    queue = deque()
    for y in range(h):
        for x in range(w):
            if thin[y][x] and mag[y][x] >= high:
                out[y, x] = True
                queue.append((y, x))
    while queue:
        y, x = queue.popleft()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                yy, xx = y + dy, x + dx
                if (0 <= yy < h and 0 <= xx < w and not out[yy, xx]
                        and thin[yy][xx] and mag[yy][xx] >= low):
                    out[yy, xx] = True
                    queue.append((yy, xx))
    return out


def brute_v10_counts(gt, dist):
    """TP/FP/FN of the 1-pixel tolerant rule by double loops."""
    h, w = gt.shape

    def near(mask, y, x):
        for yy in range(max(0, y - 1), min(h, y + 2)):
            for xx in range(max(0, x - 1), min(w, x + 2)):
                if mask[yy, xx]:
                    return True
        return False

    tp = fp = fn = 0
    for y in range(h):
        for x in range(w):
            if dist[y, x]:
                if near(gt, y, x):
                    tp += 1
                else:
                    fp += 1
            if gt[y, x] and not near(dist, y, x):
                fn += 1
    return tp, fp, fn


def brute_psnr_table(gt, dist, radius=3):
    """PSNR for every shift, from explicit pixel correspondence sums."""
    gt = gt.astype(np.int64)
    dist = dist.astype(np.int64)
    h, w = gt.shape
    table = {}
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            total = 0
            count = 0
            for y in range(h):
                for x in range(w):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w:
                        d = gt[y, x] - dist[yy, xx]
                        total += d * d
                        count += 1
            table[(dx, dy)] = math.inf if total == 0 else 10 * math.log10(255 ** 2 * count / total)
    return table


def bt_loglik(p, wins):
    ll = 0.0
    n = len(p)
    for i in range(n):
        for j in range(n):
            if i != j and wins[i][j]:
                ll += wins[i][j] * math.log(p[i] / (p[i] + p[j]))
    return ll


def bt_grid_search(wins, steps=200):
    """Three-item MLE by exhaustive search over the probability simplex."""
    best, arg = -math.inf, None
    for a in range(1, steps):
        for b in range(1, steps - a):
            c = steps - a - b
            p = (a / steps, b / steps, c / steps)
            ll = bt_loglik(p, wins)
            if ll > best:
                best, arg = ll, p
    return np.array(arg)


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)
