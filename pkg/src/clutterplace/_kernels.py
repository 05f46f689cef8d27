"""Compiled narrow-phase and relaxation kernels.

Geometry is passed as flat arrays so that whole scenes can be processed
without Python-level loops:

    obj_ps      (n+1,)  part range of object i is obj_ps[i]:obj_ps[i+1]
    kind        (P,)    0 = circle, 1 = convex polygon
    pc          (P, 2)  body-frame circle center / polygon reference center
    prad        (P,)    circle radius / polygon bounding radius about pc
    pvs         (P+1,)  vertex range of part p is pvs[p]:pvs[p+1]
    verts       (V, 2)  body-frame polygon vertices, counter-clockwise

World-frame copies (wc, wv) are produced by ``transform``.  Surfaces are
encoded as ``skind`` (0 circle, 1 polygon), ``snrm``/``soff`` (outward edge
normals and offsets, polygon only) and ``scen``/``srad`` (circle only).
"""

import math

import numpy as np
from numba import njit

CIRCLE = 0
POLYGON = 1


@njit(cache=True)
def wrap_angle(theta):
    two_pi = 2.0 * math.pi
    r = theta - two_pi * math.ceil((theta - math.pi) / two_pi)
    if r <= -math.pi:
        r += two_pi
    elif r > math.pi:
        r -= two_pi
    return r


@njit(cache=True)
def transform(poses, active, obj_ps, pc, pvs, verts, wc, wv):
    for i in range(poses.shape[0]):
        if not active[i]:
            continue
        c = math.cos(poses[i, 2])
        s = math.sin(poses[i, 2])
        tx = poses[i, 0]
        ty = poses[i, 1]
        for p in range(obj_ps[i], obj_ps[i + 1]):
            x = pc[p, 0]
            y = pc[p, 1]
            wc[p, 0] = c * x - s * y + tx
            wc[p, 1] = s * x + c * y + ty
            for v in range(pvs[p], pvs[p + 1]):
                x = verts[v, 0]
                y = verts[v, 1]
                wv[v, 0] = c * x - s * y + tx
                wv[v, 1] = s * x + c * y + ty


@njit(cache=True)
def _circle_circle(ax, ay, ar, bx, by, br):
    dx = ax - bx
    dy = ay - by
    d = math.sqrt(dx * dx + dy * dy)
    depth = ar + br - d
    if depth <= 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    if d < 1e-12:
        # coincident centers: direction left to the caller
        return depth, 0.0, 0.0, ax, ay
    nx = dx / d
    ny = dy / d
    cx = 0.5 * ((ax - nx * ar) + (bx + nx * br))
    cy = 0.5 * ((ay - ny * ar) + (by + ny * br))
    return depth, nx, ny, cx, cy


@njit(cache=True)
def _circle_polygon(cx, cy, r, v0, v1, wv):
    """Penetration of a circle into a convex polygon; direction moves the circle."""
    m = v1 - v0
    best_s = -np.inf
    bnx = 0.0
    bny = 0.0
    best_d2 = np.inf
    qx = 0.0
    qy = 0.0
    for k in range(m):
        ax = wv[v0 + k, 0]
        ay = wv[v0 + k, 1]
        bx = wv[v0 + (k + 1) % m, 0]
        by = wv[v0 + (k + 1) % m, 1]
        ex = bx - ax
        ey = by - ay
        l2 = ex * ex + ey * ey
        length = math.sqrt(l2)
        nx = ey / length
        ny = -ex / length
        s = nx * (cx - ax) + ny * (cy - ay)
        if s > best_s:
            best_s = s
            bnx = nx
            bny = ny
        t = ((cx - ax) * ex + (cy - ay) * ey) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        px = ax + t * ex
        py = ay + t * ey
        d2 = (cx - px) * (cx - px) + (cy - py) * (cy - py)
        if d2 < best_d2:
            best_d2 = d2
            qx = px
            qy = py
    if best_s <= 0.0:
        depth = r - best_s
        fx = cx - best_s * bnx
        fy = cy - best_s * bny
        return (depth, bnx, bny,
                0.5 * (fx + cx - r * bnx), 0.5 * (fy + cy - r * bny))
    d = math.sqrt(best_d2)
    depth = r - d
    if depth <= 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    nx = (cx - qx) / d
    ny = (cy - qy) / d
    return depth, nx, ny, 0.5 * (qx + cx - r * nx), 0.5 * (qy + cy - r * ny)


@njit(cache=True)
def _support_mid(v0, v1, wv, dx, dy):
    """Mean of the vertices extreme in direction (dx, dy)."""
    best = -np.inf
    for v in range(v0, v1):
        h = wv[v, 0] * dx + wv[v, 1] * dy
        if h > best:
            best = h
    eps = 1e-9 * (1.0 + abs(best))
    sx = 0.0
    sy = 0.0
    cnt = 0
    for v in range(v0, v1):
        if wv[v, 0] * dx + wv[v, 1] * dy >= best - eps:
            sx += wv[v, 0]
            sy += wv[v, 1]
            cnt += 1
    return sx / cnt, sy / cnt


@njit(cache=True)
def _sat_axes(a0, a1, b0, b1, wv, e0, e1, best, bnx, bny):
    m = e1 - e0
    for k in range(m):
        ax = wv[e0 + k, 0]
        ay = wv[e0 + k, 1]
        ex = wv[e0 + (k + 1) % m, 0] - ax
        ey = wv[e0 + (k + 1) % m, 1] - ay
        length = math.sqrt(ex * ex + ey * ey)
        nx = ey / length
        ny = -ex / length
        mina = np.inf
        maxa = -np.inf
        for v in range(a0, a1):
            h = wv[v, 0] * nx + wv[v, 1] * ny
            mina = min(mina, h)
            maxa = max(maxa, h)
        minb = np.inf
        maxb = -np.inf
        for v in range(b0, b1):
            h = wv[v, 0] * nx + wv[v, 1] * ny
            minb = min(minb, h)
            maxb = max(maxb, h)
        o1 = maxa - minb
        o2 = maxb - mina
        if o1 <= 0.0 or o2 <= 0.0:
            return 0.0, 0.0, 0.0, True
        if o1 < o2:
            if o1 < best:
                best = o1
                bnx = -nx
                bny = -ny
        elif o2 < best:
            best = o2
            bnx = nx
            bny = ny
    return best, bnx, bny, False


@njit(cache=True)
def _polygon_polygon(a0, a1, b0, b1, wv):
    best, bnx, bny, sep = _sat_axes(a0, a1, b0, b1, wv, a0, a1, np.inf, 0.0, 0.0)
    if sep:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    best, bnx, bny, sep = _sat_axes(a0, a1, b0, b1, wv, b0, b1, best, bnx, bny)
    if sep:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    sax, say = _support_mid(a0, a1, wv, -bnx, -bny)
    sbx, sby = _support_mid(b0, b1, wv, bnx, bny)
    return best, bnx, bny, 0.5 * (sax + sbx), 0.5 * (say + sby)


@njit(cache=True)
def part_pair(p, q, kind, wc, prad, pvs, wv):
    """Penetration of part p into part q; direction translates p out of q."""
    dx = wc[p, 0] - wc[q, 0]
    dy = wc[p, 1] - wc[q, 1]
    reach = prad[p] + prad[q]
    if dx * dx + dy * dy >= reach * reach:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    if kind[p] == CIRCLE:
        if kind[q] == CIRCLE:
            return _circle_circle(wc[p, 0], wc[p, 1], prad[p], wc[q, 0], wc[q, 1], prad[q])
        return _circle_polygon(wc[p, 0], wc[p, 1], prad[p], pvs[q], pvs[q + 1], wv)
    if kind[q] == CIRCLE:
        d, nx, ny, cx, cy = _circle_polygon(wc[q, 0], wc[q, 1], prad[q], pvs[p], pvs[p + 1], wv)
        return d, -nx, -ny, cx, cy
    return _polygon_polygon(pvs[p], pvs[p + 1], pvs[q], pvs[q + 1], wv)


@njit(cache=True)
def object_pair(i, j, obj_ps, kind, wc, prad, pvs, wv):
    """Deepest part-pair penetration between objects i and j."""
    best = 0.0
    bnx = 0.0
    bny = 0.0
    bcx = 0.0
    bcy = 0.0
    for p in range(obj_ps[i], obj_ps[i + 1]):
        for q in range(obj_ps[j], obj_ps[j + 1]):
            d, nx, ny, cx, cy = part_pair(p, q, kind, wc, prad, pvs, wv)
            if d > best:
                best = d
                bnx = nx
                bny = ny
                bcx = cx
                bcy = cy
    return best, bnx, bny, bcx, bcy


@njit(cache=True)
def boundary(i, obj_ps, kind, wc, prad, pvs, wv, skind, snrm, soff, scen, srad):
    """How far object i extends outside the surface; direction points inward."""
    best = 0.0
    bnx = 0.0
    bny = 0.0
    bcx = 0.0
    bcy = 0.0
    for p in range(obj_ps[i], obj_ps[i + 1]):
        if skind == POLYGON:
            for e in range(snrm.shape[0]):
                nx = snrm[e, 0]
                ny = snrm[e, 1]
                if kind[p] == CIRCLE:
                    ex = nx * wc[p, 0] + ny * wc[p, 1] + prad[p] - soff[e]
                    px = wc[p, 0] + prad[p] * nx
                    py = wc[p, 1] + prad[p] * ny
                else:
                    h = -np.inf
                    for v in range(pvs[p], pvs[p + 1]):
                        h = max(h, nx * wv[v, 0] + ny * wv[v, 1])
                    ex = h - soff[e]
                    px, py = _support_mid(pvs[p], pvs[p + 1], wv, nx, ny)
                if ex > best:
                    best = ex
                    bnx = -nx
                    bny = -ny
                    bcx = px
                    bcy = py
        else:
            if kind[p] == CIRCLE:
                dx = wc[p, 0] - scen[0]
                dy = wc[p, 1] - scen[1]
                d = math.sqrt(dx * dx + dy * dy)
                ex = d + prad[p] - srad
                if ex > best:
                    if d > 1e-12:
                        ux = dx / d
                        uy = dy / d
                    else:
                        ux = 1.0
                        uy = 0.0
                    best = ex
                    bnx = -ux
                    bny = -uy
                    bcx = wc[p, 0] + prad[p] * ux
                    bcy = wc[p, 1] + prad[p] * uy
            else:
                for v in range(pvs[p], pvs[p + 1]):
                    dx = wv[v, 0] - scen[0]
                    dy = wv[v, 1] - scen[1]
                    d = math.sqrt(dx * dx + dy * dy)
                    ex = d - srad
                    if ex > best:
                        best = ex
                        bnx = -dx / d
                        bny = -dy / d
                        bcx = wv[v, 0]
                        bcy = wv[v, 1]
    return best, bnx, bny, bcx, bcy


@njit(cache=True)
def evaluate(poses, active, bound, obj_ps, kind, pc, prad, pvs, verts,
             skind, snrm, soff, scen, srad, tol):
    """Collision bookkeeping for one configuration.

    Returns (pairs, pair_depths, boundary_depths) where ``pairs`` lists every
    unordered active pair penetrating deeper than ``tol`` and
    ``boundary_depths[i]`` is zero unless object i overhangs by more than tol.
    """
    n = poses.shape[0]
    wc = np.empty_like(pc)
    wv = np.empty_like(verts)
    transform(poses, active, obj_ps, pc, pvs, verts, wc, wv)
    pairs = np.empty((n * (n - 1) // 2 + 1, 2), dtype=np.int64)
    depths = np.empty(n * (n - 1) // 2 + 1)
    k = 0
    for i in range(n):
        if not active[i]:
            continue
        for j in range(i + 1, n):
            if not active[j]:
                continue
            dx = poses[i, 0] - poses[j, 0]
            dy = poses[i, 1] - poses[j, 1]
            reach = bound[i] + bound[j]
            if dx * dx + dy * dy >= reach * reach:
                continue
            d, _, _, _, _ = object_pair(i, j, obj_ps, kind, wc, prad, pvs, wv)
            if d > tol:
                pairs[k, 0] = i
                pairs[k, 1] = j
                depths[k] = d
                k += 1
    bdepth = np.zeros(n)
    for i in range(n):
        if active[i]:
            d, _, _, _, _ = boundary(i, obj_ps, kind, wc, prad, pvs, wv,
                                     skind, snrm, soff, scen, srad)
            if d > tol:
                bdepth[i] = d
    return pairs[:k].copy(), depths[:k].copy(), bdepth


@njit(cache=True)
def _nearest_in_region(x, y, r0, r1, rkind, rc, rrad, rvs, rverts):
    """Nearest point to (x, y) inside a union of world-frame convex parts."""
    best_d2 = np.inf
    bx = x
    by = y
    for p in range(r0, r1):
        if rkind[p] == CIRCLE:
            dx = x - rc[p, 0]
            dy = y - rc[p, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d <= rrad[p]:
                return x, y
            qx = rc[p, 0] + dx * rrad[p] / d
            qy = rc[p, 1] + dy * rrad[p] / d
        else:
            v0 = rvs[p]
            m = rvs[p + 1] - v0
            inside = True
            qx = x
            qy = y
            pd2 = np.inf
            for k in range(m):
                ax = rverts[v0 + k, 0]
                ay = rverts[v0 + k, 1]
                ex = rverts[v0 + (k + 1) % m, 0] - ax
                ey = rverts[v0 + (k + 1) % m, 1] - ay
                if ey * (x - ax) - ex * (y - ay) > 0.0:
                    inside = False
                l2 = ex * ex + ey * ey
                t = ((x - ax) * ex + (y - ay) * ey) / l2
                t = min(1.0, max(0.0, t))
                px = ax + t * ex
                py = ay + t * ey
                d2 = (x - px) ** 2 + (y - py) ** 2
                if d2 < pd2:
                    pd2 = d2
                    qx = px
                    qy = py
            if inside:
                return x, y
        d2 = (x - qx) ** 2 + (y - qy) ** 2
        if d2 < best_d2:
            best_d2 = d2
            bx = qx
            by = qy
    return bx, by


@njit(cache=True)
def project_pose(i, x, y, ball_c, ball_r, reg_ps, rkind, rc, rrad, rvs, rverts):
    has_ball = np.isfinite(ball_r[i])
    has_reg = reg_ps[i + 1] > reg_ps[i]
    for _ in range(20):
        moved = False
        if has_ball:
            dx = x - ball_c[i, 0]
            dy = y - ball_c[i, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d > ball_r[i]:
                s = ball_r[i] / d
                x = ball_c[i, 0] + dx * s
                y = ball_c[i, 1] + dy * s
                moved = True
        if has_reg:
            nx, ny = _nearest_in_region(x, y, reg_ps[i], reg_ps[i + 1],
                                        rkind, rc, rrad, rvs, rverts)
            if nx != x or ny != y:
                x = nx
                y = ny
                moved = True
        if not moved or not (has_ball and has_reg):
            break
    return x, y


@njit(cache=True)
def relax(poses, active, mobile, bound, obj_ps, kind, pc, prad, pvs, verts,
          skind, snrm, soff, scen, srad,
          ball_c, ball_r, reg_ps, rkind, rc, rrad, rvs, rverts,
          stiffness, damping, step, max_iters, stall_tol, torque_gain, tol,
          skin, rand_dirs):
    """Damped potential-field relaxation.  Returns (poses, iterations, converged).

    Every penetrating contact is pushed with ``stiffness * (depth + skin)`` so
    that vanishing overlaps still separate in a bounded number of steps.
    """
    n = poses.shape[0]
    poses = poses.copy()
    vel = np.zeros((n, 3))
    force = np.zeros((n, 3))
    wc = np.empty_like(pc)
    wv = np.empty_like(verts)
    n_rand = rand_dirs.shape[0]
    k_rand = 0
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        transform(poses, active, obj_ps, pc, pvs, verts, wc, wv)
        force[:, :] = 0.0
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j] or not (mobile[i] or mobile[j]):
                    continue
                dx = poses[i, 0] - poses[j, 0]
                dy = poses[i, 1] - poses[j, 1]
                reach = bound[i] + bound[j]
                if dx * dx + dy * dy >= reach * reach:
                    continue
                d, nx, ny, cx, cy = object_pair(i, j, obj_ps, kind, wc, prad, pvs, wv)
                if d <= tol:
                    continue
                if nx == 0.0 and ny == 0.0:
                    nx = rand_dirs[k_rand % n_rand, 0]
                    ny = rand_dirs[k_rand % n_rand, 1]
                    k_rand += 1
                fx = stiffness * (d + skin) * nx
                fy = stiffness * (d + skin) * ny
                force[i, 0] += fx
                force[i, 1] += fy
                force[i, 2] += ((cx - poses[i, 0]) * fy - (cy - poses[i, 1]) * fx) / (bound[i] * bound[i])
                force[j, 0] -= fx
                force[j, 1] -= fy
                force[j, 2] -= ((cx - poses[j, 0]) * fy - (cy - poses[j, 1]) * fx) / (bound[j] * bound[j])
        for i in range(n):
            if not (active[i] and mobile[i]):
                continue
            d, nx, ny, cx, cy = boundary(i, obj_ps, kind, wc, prad, pvs, wv,
                                         skind, snrm, soff, scen, srad)
            if d <= tol:
                continue
            fx = stiffness * (d + skin) * nx
            fy = stiffness * (d + skin) * ny
            force[i, 0] += fx
            force[i, 1] += fy
            force[i, 2] += ((cx - poses[i, 0]) * fy - (cy - poses[i, 1]) * fx) / (bound[i] * bound[i])
        motion = 0.0
        for i in range(n):
            if not (active[i] and mobile[i]):
                continue
            vel[i, 0] = damping * vel[i, 0] + step * force[i, 0]
            vel[i, 1] = damping * vel[i, 1] + step * force[i, 1]
            vel[i, 2] = damping * vel[i, 2] + step * torque_gain * force[i, 2]
            x = poses[i, 0] + step * vel[i, 0]
            y = poses[i, 1] + step * vel[i, 1]
            x, y = project_pose(i, x, y, ball_c, ball_r, reg_ps, rkind, rc, rrad, rvs, rverts)
            dth = step * vel[i, 2]
            mv = math.sqrt((x - poses[i, 0]) ** 2 + (y - poses[i, 1]) ** 2)
            mv = max(mv, abs(dth) * bound[i])
            motion = max(motion, mv)
            poses[i, 0] = x
            poses[i, 1] = y
            poses[i, 2] = wrap_angle(poses[i, 2] + dth)
        if motion < stall_tol:
            converged = True
            break
    return poses, it, converged
