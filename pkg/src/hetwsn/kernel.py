"""Compiled round loop over struct-of-arrays state.

This mirrors :func:`hetwsn.engine.run_round` step for step, including the
order of floating point operations and of random draws, so both paths give
bit-identical traces. Anything changed in ``protocols``/``engine`` must be
changed here too; ``tests/test_kernel_equivalence.py`` enforces it.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_MEECDA = 0
KIND_EECDA_APPROX = 1
KIND_LEACH = 2

NORMAL = 0

ROLE_DEAD = 0
ROLE_CH = 1
ROLE_MEMBER = 2
ROLE_SLEEPER = 3
ROLE_DIRECT = 4


@njit(cache=True, inline="always")
def _tx(L, e_elec, eps_fs, eps_mp, d0, d):
    d2 = d * d
    if d < d0:
        return L * e_elec + L * eps_fs * d2
    return L * e_elec + L * eps_mp * (d2 * d2)


@njit(cache=True, inline="always")
def _debit(energy, spent, i, cost):
    before = energy[i]
    if cost <= before:
        energy[i] = before - cost
        ok = True
    else:
        energy[i] = 0.0
        ok = False
    spent[i] += before - energy[i]
    return ok


@njit(cache=True)
def run_segment(kind, cls, d, d_bs, energy, init_e, last_ch, sleep, alive,
                p_cls, w_cls, e_elec, eps_fs, eps_mp, e_da, d0, L, max_sleep,
                buf, pos, r, r_stop,
                out_round, out_alive, out_ch, out_sleep, out_packets, out_residual, out_spent,
                record, roles, targets):
    """Run rounds from ``r`` until ``r_stop``, extinction, a full output chunk,
    or too few buffered draws to guarantee a whole round.

    Returns ``(pos, r, rows_written)``.
    """
    n = cls.shape[0]
    capacity = out_round.shape[0]
    is_ch = np.zeros(n, dtype=np.bool_)
    ch_ids = np.empty(n, dtype=np.int64)
    role = np.zeros(n, dtype=np.int8)
    target = np.full(n, -1, dtype=np.int64)
    received = np.zeros(n, dtype=np.int64)
    spent = np.zeros(n, dtype=np.float64)
    rx = L * e_elec
    row = 0
    while r < r_stop and row < capacity:
        n_alive = 0
        for i in range(n):
            if alive[i]:
                n_alive += 1
        if n_alive == 0 or buf.shape[0] - pos < n_alive:
            break

        # election, ascending id, one draw per eligible node
        nch = 0
        for i in range(n):
            is_ch[i] = False
            role[i] = ROLE_DEAD
            target[i] = -1
            received[i] = 0
            spent[i] = 0.0
        for i in range(n):
            if not alive[i]:
                continue
            k = cls[i]
            p = p_cls[k]
            w = w_cls[k]
            if last_ch[i] >= 0 and last_ch[i] >= r - r % w:
                continue
            t = p / (1 - p * (r % w))
            if kind == KIND_MEECDA and k == NORMAL:
                t = t * (energy[i] / init_e[i])
            u = buf[pos]
            pos += 1
            if u < t:
                is_ch[i] = True
                last_ch[i] = r
                ch_ids[nch] = i
                nch += 1

        # cluster formation and sleep handling
        for i in range(n):
            if not alive[i]:
                continue
            if is_ch[i]:
                role[i] = ROLE_CH
                sleep[i] = 0
                continue
            nearest = -1
            best = np.inf
            for j in range(nch):
                c = ch_ids[j]
                if d[i, c] < best:
                    best = d[i, c]
                    nearest = c
            if sleep[i] > 0:
                cheaper = False
                if nearest >= 0:
                    cheaper = (_tx(L, e_elec, eps_fs, eps_mp, d0, d[i, nearest])
                               < _tx(L, e_elec, eps_fs, eps_mp, d0, d_bs[i]))
                if cheaper:
                    sleep[i] = 0
                    role[i] = ROLE_MEMBER
                    target[i] = nearest
                elif sleep[i] == 1:
                    sleep[i] = 0
                    role[i] = ROLE_DIRECT
                else:
                    sleep[i] -= 1
                    role[i] = ROLE_SLEEPER
            elif nearest < 0:
                role[i] = ROLE_DIRECT
            elif kind == KIND_MEECDA and (_tx(L, e_elec, eps_fs, eps_mp, d0, d[i, nearest])
                                          > _tx(L, e_elec, eps_fs, eps_mp, d0, d_bs[i])):
                sleep[i] = max_sleep
                role[i] = ROLE_SLEEPER
            else:
                role[i] = ROLE_MEMBER
                target[i] = nearest

        # relays for normal CHs
        if kind == KIND_MEECDA:
            for j in range(nch):
                c = ch_ids[j]
                if cls[c] != NORMAL:
                    continue
                best_id = -1
                best_d = d_bs[c]
                for i in range(n):
                    if cls[i] == NORMAL or not alive[i] or is_ch[i] or role[i] == ROLE_SLEEPER or i == c:
                        continue
                    if d[c, i] < best_d:
                        best_d = d[c, i]
                        best_id = i
                target[c] = best_id

        # steady state
        packets = 0
        for i in range(n):
            if role[i] == ROLE_MEMBER:
                c = target[i]
                if _debit(energy, spent, i, _tx(L, e_elec, eps_fs, eps_mp, d0, d[i, c])):
                    received[c] += 1
        for j in range(nch):
            c = ch_ids[j]
            n_rx = received[c]
            if not _debit(energy, spent, c, n_rx * rx):
                continue
            if not _debit(energy, spent, c, e_da * L * (n_rx + 1)):
                continue
            relay = target[c]
            if relay < 0:
                if _debit(energy, spent, c, _tx(L, e_elec, eps_fs, eps_mp, d0, d_bs[c])):
                    packets += 1
                continue
            if not _debit(energy, spent, c, _tx(L, e_elec, eps_fs, eps_mp, d0, d[c, relay])):
                continue
            if _debit(energy, spent, relay, rx):
                if _debit(energy, spent, relay, _tx(L, e_elec, eps_fs, eps_mp, d0, d_bs[relay])):
                    packets += 1
        for i in range(n):
            if role[i] == ROLE_DIRECT:
                if _debit(energy, spent, i, _tx(L, e_elec, eps_fs, eps_mp, d0, d_bs[i])):
                    packets += 1

        # deaths and bookkeeping
        a0 = 0
        a1 = 0
        a2 = 0
        n_sleep = 0
        residual = 0.0
        spent_total = 0.0
        for i in range(n):
            if alive[i] and energy[i] <= 0.0:
                alive[i] = False
            if alive[i]:
                if cls[i] == 0:
                    a0 += 1
                elif cls[i] == 1:
                    a1 += 1
                else:
                    a2 += 1
            if role[i] == ROLE_SLEEPER:
                n_sleep += 1
            residual += energy[i]
            spent_total += spent[i]
        out_round[row] = r
        out_alive[row, 0] = a0
        out_alive[row, 1] = a1
        out_alive[row, 2] = a2
        out_ch[row] = nch
        out_sleep[row] = n_sleep
        out_packets[row] = packets
        out_residual[row] = residual
        out_spent[row] = spent_total
        if record:
            for i in range(n):
                roles[row, i] = role[i]
                targets[row, i] = target[i]
        row += 1
        r += 1
    return pos, r, row
