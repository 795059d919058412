"""Numba kernels for rigid-body settling.

Contacts are generated by testing each body's precomputed surface sample
points against the other body's face planes (both directions). This catches
vertex-face, edge-face, and crossing-slab configurations; pure edge-edge
contacts are approximated by the edge subdivision samples. The solver is a
sequential-impulse velocity solver with split-impulse position correction,
speculative margins, Coulomb friction, and restitution.

All loops are serial: determinism on a fixed build follows from fixed
iteration order and IEEE arithmetic.
"""

import numpy as np
from numba import njit

GROUND_FRICTION = 0.8
REST_THRESHOLD = 1.0     # m/s; impacts slower than this do not bounce
MAX_CONTACTS_PER_PAIR = 24


@njit(cache=True, inline="always")
def _quat_to_mat(q, R):
    x, y, z, w = q[0], q[1], q[2], q[3]
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    R[0, 0] = 1.0 - 2.0 * (yy + zz)
    R[0, 1] = 2.0 * (xy - wz)
    R[0, 2] = 2.0 * (xz + wy)
    R[1, 0] = 2.0 * (xy + wz)
    R[1, 1] = 1.0 - 2.0 * (xx + zz)
    R[1, 2] = 2.0 * (yz - wx)
    R[2, 0] = 2.0 * (xz - wy)
    R[2, 1] = 2.0 * (yz + wx)
    R[2, 2] = 1.0 - 2.0 * (xx + yy)


@njit(cache=True)
def compute_rot_mats(quat, out, start, end):
    for i in range(start, end):
        _quat_to_mat(quat[i], out[i])


@njit(cache=True)
def compute_aabbs(pos, rot, class_idx, cls_half, lo, hi, start, end):
    for i in range(start, end):
        c = class_idx[i]
        for k in range(3):
            hw = (abs(rot[i, k, 0]) * cls_half[c, 0]
                  + abs(rot[i, k, 1]) * cls_half[c, 1]
                  + abs(rot[i, k, 2]) * cls_half[c, 2])
            lo[i, k] = pos[i, k] - hw
            hi[i, k] = pos[i, k] + hw


@njit(cache=True)
def _points_vs_planes(ia, ib, pos, rot, class_idx,
                      smp, smp_off, pln, pln_off, cls_brad, margin,
                      c_i, c_j, c_p, c_n, c_d, c_s, n_c, max_c):
    """Contacts from ia's samples inside ib's hull. Normal pushes ia out."""
    ca = class_idx[ia]
    cb = class_idx[ib]
    # squared reach test per sample against b's bounding sphere
    reach = cls_brad[cb] + margin
    reach2 = reach * reach
    best_d = np.empty(MAX_CONTACTS_PER_PAIR)
    best_s = np.empty(MAX_CONTACTS_PER_PAIR, dtype=np.int64)
    best_f = np.empty(MAX_CONTACTS_PER_PAIR, dtype=np.int64)
    cnt = 0
    for s in range(smp_off[ca], smp_off[ca + 1]):
        # world point
        px = py = pz = 0.0
        for k in range(3):
            px += rot[ia, 0, k] * smp[s, k]
            py += rot[ia, 1, k] * smp[s, k]
            pz += rot[ia, 2, k] * smp[s, k]
        px += pos[ia, 0]
        py += pos[ia, 1]
        pz += pos[ia, 2]
        dx = px - pos[ib, 0]
        dy = py - pos[ib, 1]
        dz = pz - pos[ib, 2]
        if dx * dx + dy * dy + dz * dz > reach2:
            continue
        # into b's frame
        qx = rot[ib, 0, 0] * dx + rot[ib, 1, 0] * dy + rot[ib, 2, 0] * dz
        qy = rot[ib, 0, 1] * dx + rot[ib, 1, 1] * dy + rot[ib, 2, 1] * dz
        qz = rot[ib, 0, 2] * dx + rot[ib, 1, 2] * dy + rot[ib, 2, 2] * dz
        best = -1.0e30
        bestf = -1
        outside = False
        for f in range(pln_off[cb], pln_off[cb + 1]):
            d = pln[f, 0] * qx + pln[f, 1] * qy + pln[f, 2] * qz - pln[f, 3]
            if d > margin:
                outside = True
                break
            if d > best:
                best = d
                bestf = f
        if outside or bestf < 0:
            continue
        if cnt < MAX_CONTACTS_PER_PAIR:
            best_d[cnt] = best
            best_f[cnt] = bestf
            best_s[cnt] = s
            cnt += 1
        else:
            worst = 0
            for k in range(1, MAX_CONTACTS_PER_PAIR):
                if best_d[k] > best_d[worst]:
                    worst = k
            if best < best_d[worst]:
                best_d[worst] = best
                best_f[worst] = bestf
                best_s[worst] = s
    n = n_c
    for k in range(cnt):
        if n >= max_c:
            break
        s = best_s[k]
        f = best_f[k]
        px = py = pz = 0.0
        for m in range(3):
            px += rot[ia, 0, m] * smp[s, m]
            py += rot[ia, 1, m] * smp[s, m]
            pz += rot[ia, 2, m] * smp[s, m]
        px += pos[ia, 0]
        py += pos[ia, 1]
        pz += pos[ia, 2]
        c_i[n] = ia
        c_j[n] = ib
        c_p[n, 0] = px
        c_p[n, 1] = py
        c_p[n, 2] = pz
        c_n[n, 0] = (rot[ib, 0, 0] * pln[f, 0] + rot[ib, 0, 1] * pln[f, 1]
                     + rot[ib, 0, 2] * pln[f, 2])
        c_n[n, 1] = (rot[ib, 1, 0] * pln[f, 0] + rot[ib, 1, 1] * pln[f, 1]
                     + rot[ib, 1, 2] * pln[f, 2])
        c_n[n, 2] = (rot[ib, 2, 0] * pln[f, 0] + rot[ib, 2, 1] * pln[f, 1]
                     + rot[ib, 2, 2] * pln[f, 2])
        c_d[n] = best_d[k]   # signed distance (negative = penetrating)
        c_s[n] = s
        n += 1
    return n


@njit(cache=True)
def _ground_contacts(i, pos, rot, class_idx, smp, smp_off, margin,
                     c_i, c_j, c_p, c_n, c_d, c_s, n_c, max_c):
    ca = class_idx[i]
    best_d = np.empty(MAX_CONTACTS_PER_PAIR)
    best_s = np.empty(MAX_CONTACTS_PER_PAIR, dtype=np.int64)
    cnt = 0
    for s in range(smp_off[ca], smp_off[ca + 1]):
        z = (rot[i, 2, 0] * smp[s, 0] + rot[i, 2, 1] * smp[s, 1]
             + rot[i, 2, 2] * smp[s, 2] + pos[i, 2])
        if z > margin:
            continue
        n = cnt
        if n < MAX_CONTACTS_PER_PAIR:
            best_d[n] = z
            best_s[n] = s
            cnt = n + 1
        else:
            worst = 0
            for k in range(1, MAX_CONTACTS_PER_PAIR):
                if best_d[k] > best_d[worst]:
                    worst = k
            if z < best_d[worst]:
                best_d[worst] = z
                best_s[worst] = s
    n = n_c
    for k in range(cnt):
        if n >= max_c:
            break
        s = best_s[k]
        c_i[n] = i
        c_j[n] = -1
        for m in range(3):
            c_p[n, m] = (rot[i, m, 0] * smp[s, 0] + rot[i, m, 1] * smp[s, 1]
                         + rot[i, m, 2] * smp[s, 2] + pos[i, m])
        c_n[n, 0] = 0.0
        c_n[n, 1] = 0.0
        c_n[n, 2] = 1.0
        c_d[n] = best_d[k]
        c_s[n] = s
        n += 1
    return n


@njit(cache=True)
def collect_contacts(nd, n_total, pos, rot, class_idx, asleep,
                     lo, hi, smp, smp_off, pln, pln_off, cls_brad,
                     grid_lo, cell, gnx, gny, grid_start, grid_items,
                     margin, c_i, c_j, c_p, c_n, c_d, c_s):
    max_c = c_d.shape[0]
    n_c = 0
    # ground
    for i in range(nd):
        if asleep[i]:
            continue
        cbr = cls_brad[class_idx[i]]
        if pos[i, 2] - cbr <= margin:
            n_c = _ground_contacts(i, pos, rot, class_idx, smp, smp_off,
                                   margin, c_i, c_j, c_p, c_n, c_d, c_s,
                                   n_c, max_c)
    # dynamic-dynamic
    for i in range(nd):
        for j in range(i + 1, nd):
            if asleep[i] and asleep[j]:
                continue
            if (lo[i, 0] > hi[j, 0] + margin or lo[j, 0] > hi[i, 0] + margin
                    or lo[i, 1] > hi[j, 1] + margin or lo[j, 1] > hi[i, 1] + margin
                    or lo[i, 2] > hi[j, 2] + margin or lo[j, 2] > hi[i, 2] + margin):
                continue
            n_c = _points_vs_planes(i, j, pos, rot, class_idx, smp, smp_off,
                                    pln, pln_off, cls_brad, margin,
                                    c_i, c_j, c_p, c_n, c_d, c_s, n_c, max_c)
            n_c = _points_vs_planes(j, i, pos, rot, class_idx, smp, smp_off,
                                    pln, pln_off, cls_brad, margin,
                                    c_i, c_j, c_p, c_n, c_d, c_s, n_c, max_c)
    # dynamic-static via xy grid over static bodies
    if n_total > nd and gnx > 0:
        for i in range(nd):
            if asleep[i]:
                continue
            cx0 = int(np.floor((lo[i, 0] - margin - grid_lo[0]) / cell))
            cx1 = int(np.floor((hi[i, 0] + margin - grid_lo[0]) / cell))
            cy0 = int(np.floor((lo[i, 1] - margin - grid_lo[1]) / cell))
            cy1 = int(np.floor((hi[i, 1] + margin - grid_lo[1]) / cell))
            if cx0 < 0:
                cx0 = 0
            if cy0 < 0:
                cy0 = 0
            if cx1 >= gnx:
                cx1 = gnx - 1
            if cy1 >= gny:
                cy1 = gny - 1
            for cy in range(cy0, cy1 + 1):
                for cx in range(cx0, cx1 + 1):
                    cidx = cy * gnx + cx
                    for kk in range(grid_start[cidx], grid_start[cidx + 1]):
                        j = grid_items[kk]
                        if (lo[i, 0] > hi[j, 0] + margin
                                or lo[j, 0] > hi[i, 0] + margin
                                or lo[i, 1] > hi[j, 1] + margin
                                or lo[j, 1] > hi[i, 1] + margin
                                or lo[i, 2] > hi[j, 2] + margin
                                or lo[j, 2] > hi[i, 2] + margin):
                            continue
                        n_c = _points_vs_planes(i, j, pos, rot, class_idx,
                                                smp, smp_off, pln, pln_off,
                                                cls_brad, margin, c_i, c_j,
                                                c_p, c_n, c_d, c_s, n_c, max_c)
                        n_c = _points_vs_planes(j, i, pos, rot, class_idx,
                                                smp, smp_off, pln, pln_off,
                                                cls_brad, margin, c_i, c_j,
                                                c_p, c_n, c_d, c_s, n_c, max_c)
    return n_c


@njit(cache=True, inline="always")
def _body_mobile(i, nd, asleep):
    return i >= 0 and i < nd and asleep[i] == 0


@njit(cache=True)
def solve_contacts(n_c, c_i, c_j, c_p, c_n, c_d, c_s, nd, pos, vel, omg,
                   vb, wb, asleep, class_idx, cls_inv_mass, inv_inertia_world,
                   cls_friction, cls_restitution, dt, beta, slop, iters):
    """Sequential-impulse solver with split-impulse position correction.

    Penetration is resolved through pseudo-velocities (vb, wb) that advance
    positions but never feed back into the momentum state, so depth
    correction cannot pump energy into resting stacks.
    """
    if n_c == 0:
        return
    rA = np.empty((n_c, 3))
    rB = np.empty((n_c, 3))
    t1 = np.empty((n_c, 3))
    t2 = np.empty((n_c, 3))
    kn = np.empty(n_c)
    kt1 = np.empty(n_c)
    kt2 = np.empty(n_c)
    target = np.empty(n_c)
    bias_target = np.empty(n_c)
    mu = np.empty(n_c)
    acc_n = np.zeros(n_c)
    acc_t1 = np.zeros(n_c)
    acc_t2 = np.zeros(n_c)
    acc_b = np.zeros(n_c)

    for c in range(n_c):
        i = c_i[c]
        j = c_j[c]
        nx, ny, nz = c_n[c, 0], c_n[c, 1], c_n[c, 2]
        for m in range(3):
            rA[c, m] = c_p[c, m] - pos[i, m]
            rB[c, m] = c_p[c, m] - pos[j, m] if j >= 0 else 0.0
        # tangent basis
        if abs(nz) < 0.9:
            tx, ty, tz = ny, -nx, 0.0
        else:
            tx, ty, tz = 0.0, nz, -ny
        tl = np.sqrt(tx * tx + ty * ty + tz * tz)
        t1[c, 0], t1[c, 1], t1[c, 2] = tx / tl, ty / tl, tz / tl
        t2[c, 0] = ny * t1[c, 2] - nz * t1[c, 1]
        t2[c, 1] = nz * t1[c, 0] - nx * t1[c, 2]
        t2[c, 2] = nx * t1[c, 1] - ny * t1[c, 0]

        im = 0.0
        fr_i = cls_friction[class_idx[i]]
        re = cls_restitution[class_idx[i]]
        if _body_mobile(i, nd, asleep):
            im += cls_inv_mass[class_idx[i]]
        if j >= 0:
            fr = np.sqrt(fr_i * cls_friction[class_idx[j]])
            if cls_restitution[class_idx[j]] > re:
                re = cls_restitution[class_idx[j]]
            if _body_mobile(j, nd, asleep):
                im += cls_inv_mass[class_idx[j]]
        else:
            fr = np.sqrt(fr_i * GROUND_FRICTION)
        mu[c] = fr

        for axis in range(3):
            if axis == 0:
                ax, ay, az = nx, ny, nz
            elif axis == 1:
                ax, ay, az = t1[c, 0], t1[c, 1], t1[c, 2]
            else:
                ax, ay, az = t2[c, 0], t2[c, 1], t2[c, 2]
            k = im
            if _body_mobile(i, nd, asleep):
                cx = rA[c, 1] * az - rA[c, 2] * ay
                cy = rA[c, 2] * ax - rA[c, 0] * az
                cz = rA[c, 0] * ay - rA[c, 1] * ax
                Ic = inv_inertia_world[i]
                ux = Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                uy = Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                uz = Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz
                k += cx * ux + cy * uy + cz * uz
            if _body_mobile(j, nd, asleep):
                cx = rB[c, 1] * az - rB[c, 2] * ay
                cy = rB[c, 2] * ax - rB[c, 0] * az
                cz = rB[c, 0] * ay - rB[c, 1] * ax
                Ic = inv_inertia_world[j]
                ux = Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                uy = Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                uz = Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz
                k += cx * ux + cy * uy + cz * uz
            if k <= 0.0:
                k = 1.0e30
            if axis == 0:
                kn[c] = 1.0 / k
            elif axis == 1:
                kt1[c] = 1.0 / k
            else:
                kt2[c] = 1.0 / k

        # relative normal velocity before solve (for restitution)
        vn0 = 0.0
        if _body_mobile(i, nd, asleep):
            vn0 += ((vel[i, 0] + omg[i, 1] * rA[c, 2] - omg[i, 2] * rA[c, 1]) * nx
                    + (vel[i, 1] + omg[i, 2] * rA[c, 0] - omg[i, 0] * rA[c, 2]) * ny
                    + (vel[i, 2] + omg[i, 0] * rA[c, 1] - omg[i, 1] * rA[c, 0]) * nz)
        if _body_mobile(j, nd, asleep):
            vn0 -= ((vel[j, 0] + omg[j, 1] * rB[c, 2] - omg[j, 2] * rB[c, 1]) * nx
                    + (vel[j, 1] + omg[j, 2] * rB[c, 0] - omg[j, 0] * rB[c, 2]) * ny
                    + (vel[j, 2] + omg[j, 0] * rB[c, 1] - omg[j, 1] * rB[c, 0]) * nz)
        depth = -c_d[c] if c_d[c] < 0.0 else 0.0
        sep = c_d[c] if c_d[c] > 0.0 else 0.0
        tgt = 0.0
        if vn0 < -REST_THRESHOLD:
            tgt = -re * vn0
        target[c] = tgt - sep / dt   # speculative: allow closing by sep
        bt = beta / dt * (depth - slop) if depth > slop else 0.0
        if bt > 0.2:
            bt = 0.2  # clamp position-correction velocity (anti-popping)
        bias_target[c] = bt

    for _ in range(iters):
        for c in range(n_c):
            i = c_i[c]
            j = c_j[c]
            mob_i = _body_mobile(i, nd, asleep)
            mob_j = _body_mobile(j, nd, asleep)
            nx, ny, nz = c_n[c, 0], c_n[c, 1], c_n[c, 2]
            vx = vy = vz = 0.0
            if mob_i:
                vx = vel[i, 0] + omg[i, 1] * rA[c, 2] - omg[i, 2] * rA[c, 1]
                vy = vel[i, 1] + omg[i, 2] * rA[c, 0] - omg[i, 0] * rA[c, 2]
                vz = vel[i, 2] + omg[i, 0] * rA[c, 1] - omg[i, 1] * rA[c, 0]
            if mob_j:
                vx -= vel[j, 0] + omg[j, 1] * rB[c, 2] - omg[j, 2] * rB[c, 1]
                vy -= vel[j, 1] + omg[j, 2] * rB[c, 0] - omg[j, 0] * rB[c, 2]
                vz -= vel[j, 2] + omg[j, 0] * rB[c, 1] - omg[j, 1] * rB[c, 0]
            vn = vx * nx + vy * ny + vz * nz
            dl = -(vn - target[c]) * kn[c]
            new_acc = acc_n[c] + dl
            if new_acc < 0.0:
                new_acc = 0.0
            dl = new_acc - acc_n[c]
            acc_n[c] = new_acc
            px, py, pz = dl * nx, dl * ny, dl * nz

            # friction on both tangents
            lim = mu[c] * acc_n[c]
            for axis in range(2):
                if axis == 0:
                    ax, ay, az = t1[c, 0], t1[c, 1], t1[c, 2]
                    kt = kt1[c]
                else:
                    ax, ay, az = t2[c, 0], t2[c, 1], t2[c, 2]
                    kt = kt2[c]
                vt = vx * ax + vy * ay + vz * az
                dlt = -vt * kt
                if axis == 0:
                    new_t = acc_t1[c] + dlt
                    if new_t > lim:
                        new_t = lim
                    elif new_t < -lim:
                        new_t = -lim
                    dlt = new_t - acc_t1[c]
                    acc_t1[c] = new_t
                else:
                    new_t = acc_t2[c] + dlt
                    if new_t > lim:
                        new_t = lim
                    elif new_t < -lim:
                        new_t = -lim
                    dlt = new_t - acc_t2[c]
                    acc_t2[c] = new_t
                px += dlt * ax
                py += dlt * ay
                pz += dlt * az

            if mob_i:
                imi = cls_inv_mass[class_idx[i]]
                vel[i, 0] += imi * px
                vel[i, 1] += imi * py
                vel[i, 2] += imi * pz
                cx = rA[c, 1] * pz - rA[c, 2] * py
                cy = rA[c, 2] * px - rA[c, 0] * pz
                cz = rA[c, 0] * py - rA[c, 1] * px
                Ic = inv_inertia_world[i]
                omg[i, 0] += Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                omg[i, 1] += Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                omg[i, 2] += Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz
            if mob_j:
                imj = cls_inv_mass[class_idx[j]]
                vel[j, 0] -= imj * px
                vel[j, 1] -= imj * py
                vel[j, 2] -= imj * pz
                cx = rB[c, 1] * pz - rB[c, 2] * py
                cy = rB[c, 2] * px - rB[c, 0] * pz
                cz = rB[c, 0] * py - rB[c, 1] * px
                Ic = inv_inertia_world[j]
                omg[j, 0] -= Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                omg[j, 1] -= Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                omg[j, 2] -= Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz

    # split-impulse position pass: normal-only pseudo-impulses against the
    # bias targets, accumulated into vb/wb (applied to positions by caller)
    for _ in range(iters):
        for c in range(n_c):
            if bias_target[c] <= 0.0:
                continue
            i = c_i[c]
            j = c_j[c]
            mob_i = _body_mobile(i, nd, asleep)
            mob_j = _body_mobile(j, nd, asleep)
            nx, ny, nz = c_n[c, 0], c_n[c, 1], c_n[c, 2]
            vn = 0.0
            if mob_i:
                vn += ((vb[i, 0] + wb[i, 1] * rA[c, 2] - wb[i, 2] * rA[c, 1]) * nx
                       + (vb[i, 1] + wb[i, 2] * rA[c, 0] - wb[i, 0] * rA[c, 2]) * ny
                       + (vb[i, 2] + wb[i, 0] * rA[c, 1] - wb[i, 1] * rA[c, 0]) * nz)
            if mob_j:
                vn -= ((vb[j, 0] + wb[j, 1] * rB[c, 2] - wb[j, 2] * rB[c, 1]) * nx
                       + (vb[j, 1] + wb[j, 2] * rB[c, 0] - wb[j, 0] * rB[c, 2]) * ny
                       + (vb[j, 2] + wb[j, 0] * rB[c, 1] - wb[j, 1] * rB[c, 0]) * nz)
            dl = -(vn - bias_target[c]) * kn[c]
            new_b = acc_b[c] + dl
            if new_b < 0.0:
                new_b = 0.0
            dl = new_b - acc_b[c]
            acc_b[c] = new_b
            px, py, pz = dl * nx, dl * ny, dl * nz
            if mob_i:
                imi = cls_inv_mass[class_idx[i]]
                vb[i, 0] += imi * px
                vb[i, 1] += imi * py
                vb[i, 2] += imi * pz
                cx = rA[c, 1] * pz - rA[c, 2] * py
                cy = rA[c, 2] * px - rA[c, 0] * pz
                cz = rA[c, 0] * py - rA[c, 1] * px
                Ic = inv_inertia_world[i]
                wb[i, 0] += Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                wb[i, 1] += Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                wb[i, 2] += Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz
            if mob_j:
                imj = cls_inv_mass[class_idx[j]]
                vb[j, 0] -= imj * px
                vb[j, 1] -= imj * py
                vb[j, 2] -= imj * pz
                cx = rB[c, 1] * pz - rB[c, 2] * py
                cy = rB[c, 2] * px - rB[c, 0] * pz
                cz = rB[c, 0] * py - rB[c, 1] * px
                Ic = inv_inertia_world[j]
                wb[j, 0] -= Ic[0, 0] * cx + Ic[0, 1] * cy + Ic[0, 2] * cz
                wb[j, 1] -= Ic[1, 0] * cx + Ic[1, 1] * cy + Ic[1, 2] * cz
                wb[j, 2] -= Ic[2, 0] * cx + Ic[2, 1] * cy + Ic[2, 2] * cz


@njit(cache=True)
def step_range(n_steps, nd, n_total, dt, gravity,
               pos, quat, vel, omg, asleep, sleep_count,
               class_idx, cls_inv_mass, cls_inv_inertia, cls_friction,
               cls_restitution, cls_brad, cls_half,
               smp, smp_off, pln, pln_off,
               rot, lo, hi,
               grid_lo, cell, gnx, gny, grid_start, grid_items,
               v_sleep, w_sleep, sleep_frames, margin, beta, slop, iters,
               lin_damp, ang_damp,
               c_i, c_j, c_p, c_n, c_d, c_s):
    """Advance the world up to n_steps; returns (steps_taken, all_asleep)."""
    inv_inertia_world = np.zeros((nd, 3, 3))
    in_contact = np.zeros(nd, dtype=np.uint8)
    vb = np.zeros((nd, 3))
    wb = np.zeros((nd, 3))
    for step in range(n_steps):
        all_asleep = True
        for i in range(nd):
            if asleep[i] == 0:
                all_asleep = False
                break
        if all_asleep:
            return step, True

        # integrate forces + world-space inverse inertia
        for i in range(nd):
            if asleep[i]:
                continue
            vel[i, 2] -= gravity * dt
            for m in range(3):
                vel[i, m] *= lin_damp
                omg[i, m] *= ang_damp
            c = class_idx[i]
            R = rot[i]
            _quat_to_mat(quat[i], R)
            Ib = cls_inv_inertia[c]
            for a in range(3):
                for b in range(3):
                    s = 0.0
                    for k in range(3):
                        for l in range(3):
                            s += R[a, k] * Ib[k, l] * R[b, l]
                    inv_inertia_world[i, a, b] = s

        compute_aabbs(pos, rot, class_idx, cls_half, lo, hi, 0, nd)

        n_c = collect_contacts(nd, n_total, pos, rot, class_idx, asleep,
                               lo, hi, smp, smp_off, pln, pln_off, cls_brad,
                               grid_lo, cell, gnx, gny, grid_start, grid_items,
                               margin, c_i, c_j, c_p, c_n, c_d, c_s)

        for i in range(nd):
            for m in range(3):
                vb[i, m] = 0.0
                wb[i, m] = 0.0

        solve_contacts(n_c, c_i, c_j, c_p, c_n, c_d, c_s, nd, pos, vel, omg,
                       vb, wb, asleep, class_idx, cls_inv_mass,
                       inv_inertia_world, cls_friction, cls_restitution,
                       dt, beta, slop, iters)

        for i in range(nd):
            in_contact[i] = 0
        for c in range(n_c):
            if c_i[c] < nd:
                in_contact[c_i[c]] = 1
            if 0 <= c_j[c] < nd:
                in_contact[c_j[c]] = 1

        # integrate positions, orientations; sleep bookkeeping
        for i in range(nd):
            if asleep[i]:
                continue
            # extra dissipation for near-rest bodies in contact: kills the
            # rocking limit cycle sustained by contact-set switching, which
            # otherwise keeps velocities hovering just above sleep thresholds
            if in_contact[i]:
                v2 = vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2
                w2 = omg[i, 0] ** 2 + omg[i, 1] ** 2 + omg[i, 2] ** 2
                if v2 < 25.0 * v_sleep * v_sleep and w2 < 9.0 * w_sleep * w_sleep:
                    for m in range(3):
                        vel[i, m] *= 0.9
                        omg[i, m] *= 0.9
            for m in range(3):
                pos[i, m] += (vel[i, m] + vb[i, m]) * dt
            wx = omg[i, 0] + wb[i, 0]
            wy = omg[i, 1] + wb[i, 1]
            wz = omg[i, 2] + wb[i, 2]
            qx, qy, qz, qw = quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3]
            # dq/dt = 0.5 * omega_quat * q (scalar-last)
            dqx = 0.5 * (wy * qz - wz * qy + wx * qw)
            dqy = 0.5 * (wz * qx - wx * qz + wy * qw)
            dqz = 0.5 * (wx * qy - wy * qx + wz * qw)
            dqw = 0.5 * (-wx * qx - wy * qy - wz * qz)
            qx += dt * dqx
            qy += dt * dqy
            qz += dt * dqz
            qw += dt * dqw
            norm = np.sqrt(qx * qx + qy * qy + qz * qz + qw * qw)
            quat[i, 0] = qx / norm
            quat[i, 1] = qy / norm
            quat[i, 2] = qz / norm
            quat[i, 3] = qw / norm

            v2 = vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2
            w2 = omg[i, 0] ** 2 + omg[i, 1] ** 2 + omg[i, 2] ** 2
            if v2 < v_sleep * v_sleep and w2 < w_sleep * w_sleep:
                sleep_count[i] += 1
                if sleep_count[i] >= sleep_frames:
                    asleep[i] = 1
                    for m in range(3):
                        vel[i, m] = 0.0
                        omg[i, m] = 0.0
            else:
                sleep_count[i] = 0

    all_asleep = True
    for i in range(nd):
        if asleep[i] == 0:
            all_asleep = False
            break
    return n_steps, all_asleep


@njit(cache=True)
def query_contacts(nd, n_total, pos, quat, class_idx,
                   cls_brad, cls_half, smp, smp_off, pln, pln_off,
                   grid_lo, cell, gnx, gny, grid_start, grid_items,
                   margin, c_i, c_j, c_p, c_n, c_d, c_s):
    """One-shot contact query on a static configuration (post-checks)."""
    rot = np.empty((n_total, 3, 3))
    lo = np.empty((n_total, 3))
    hi = np.empty((n_total, 3))
    compute_rot_mats(quat, rot, 0, n_total)
    compute_aabbs(pos, rot, class_idx, cls_half, lo, hi, 0, n_total)
    asleep = np.zeros(nd, dtype=np.uint8)
    return collect_contacts(nd, n_total, pos, rot, class_idx, asleep,
                            lo, hi, smp, smp_off, pln, pln_off, cls_brad,
                            grid_lo, cell, gnx, gny, grid_start, grid_items,
                            margin, c_i, c_j, c_p, c_n, c_d, c_s)
