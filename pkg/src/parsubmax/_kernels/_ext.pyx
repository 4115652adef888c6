# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Dense-table batch selection and probing for small ground sets.

Everything here mirrors the generic engine operation for operation:
identical floating-point expression order, identical RNG draw order
(one uniform per permutation key, one per acceptance coin, one per
subset-sampling member), and identical query/round/check accounting.
Ground sets are limited to 20 elements so values and feasibility live
in full 2^n lookup tables and every set is a bit mask.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport HUGE_VAL

from numpy.random cimport bitgen_t

cdef int CAP = 20


cdef inline int _popcount(unsigned long long x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline void _round(long long* met, long long nq):
    # met: [queries, rounds, max_queries_per_round, checks]
    if nq > 0:
        met[1] += 1
        met[0] += nq
        if nq > met[2]:
            met[2] = nq


cdef inline double _next(bitgen_t* bg):
    return bg.next_double(bg.state)


cdef inline int _pred_cost(int i, int m, const double* ext, const unsigned char* feas,
                           const double* chain, const double* cL, double rho,
                           double eps, double costL):
    cdef double acc = 0.0
    cdef double marg
    cdef int j
    for j in range(m):
        marg = ext[i * CAP + j] - chain[i]
        if feas[i * CAP + j] and (marg / cL[j]) >= rho:
            acc += cL[j]
        else:
            acc += 0.0
    return acc <= (1.0 - eps) * costL


cdef inline int _pred_damage(int i, int m, const double* ext, const unsigned char* feas,
                             const double* chain, const double* cL, double rho,
                             double eps, const double* dsum):
    cdef double msum = 0.0
    cdef double negsum = 0.0
    cdef double marg
    cdef int j
    for j in range(m):
        marg = ext[i * CAP + j] - chain[i]
        if feas[i * CAP + j] and (marg / cL[j]) >= rho:
            msum += marg
        else:
            msum += 0.0
        if marg < 0.0:
            negsum += -marg
        else:
            negsum += 0.0
    return eps * msum <= negsum + dsum[i]


cdef int _rb_core(const double[::1] table, const unsigned char[::1] indep,
                  const double[::1] costs,
                  unsigned long long shift, unsigned long long root,
                  unsigned long long I_mask, double rho, long long M,
                  double p, double eps, int binary, int n, bitgen_t* bg,
                  long long* met,
                  unsigned long long* A_out, unsigned long long* L_out,
                  int* U_out, int* nU_out, long long* count_out,
                  double* fA_out, double* f0_out) except -1:
    cdef int L[20]
    cdef double Lmarg[20]
    cdef double cL[20]
    cdef int pool[20]
    cdef int perm[20]
    cdef int order[20]
    cdef double keys[20]
    cdef int seq[20]
    cdef unsigned long long prefmask[21]
    cdef double chain[21]
    cdef double dsum[21]
    cdef double ext[420]            # (CAP + 1) rows of CAP columns, flattened
    cdef unsigned char feas[420]
    cdef unsigned char cached[21]
    cdef unsigned char surv[20]
    cdef double rvals[20]
    cdef unsigned char rfeas[20]
    cdef int newL[20]
    cdef double newmarg[20]

    cdef unsigned long long A_mask = 0
    cdef unsigned long long pm, bit
    cdef double f0, fA, ev, marg, kd, dj, acc, bv, v
    cdef long long count = 0
    cdef int m = 0, m0 = 0, nU = 0
    cdef int u, i, j, jj, s, npool, nrest, nk, d, t1, t2, tstar, mid
    cdef int lo1, hi1, lo2, hi2, nnew, ns, newm, accept

    f0 = table[shift]
    m0 = _popcount(I_mask)
    if m0:
        for u in range(n):
            if not (I_mask >> u) & 1:
                continue
            bit = (<unsigned long long> 1) << u
            ev = table[shift | bit]
            marg = ev - f0
            if indep[root | bit] and (marg / costs[u]) >= rho:
                L[m] = u
                Lmarg[m] = marg
                m += 1
        met[3] += m0
    _round(met, m0 + 1)
    fA = f0

    while m > 0 and count < M:
        # ---- maximal random feasible extension (no value queries) ----
        d = 0
        pm = A_mask
        npool = m
        for j in range(m):
            pool[j] = L[j]
        while npool > 0:
            for j in range(npool):
                keys[j] = _next(bg)
                order[j] = j
            # stable insertion sort of order[] by keys, ties keep index order
            for i in range(1, npool):
                jj = order[i]
                kd = keys[jj]
                j = i - 1
                while j >= 0 and keys[order[j]] > kd:
                    order[j + 1] = order[j]
                    j -= 1
                order[j + 1] = jj
            for j in range(npool):
                perm[j] = pool[order[j]]
            s = npool
            for j in range(npool):
                bit = (<unsigned long long> 1) << perm[j]
                if not indep[root | pm | bit]:
                    s = j
                    break
                pm |= bit
            met[3] += s + 1 if s + 1 < npool else npool
            for j in range(s):
                seq[d] = perm[j]
                d += 1
            nrest = npool - s
            if nrest == 0:
                break
            nk = 0
            for j in range(s, npool):
                bit = (<unsigned long long> 1) << perm[j]
                if indep[root | pm | bit]:
                    pool[nk] = perm[j]
                    nk += 1
            met[3] += nrest
            # ascending order for the next pass
            for i in range(1, nk):
                u = pool[i]
                j = i - 1
                while j >= 0 and pool[j] > u:
                    pool[j + 1] = pool[j]
                    j -= 1
                pool[j + 1] = u
            npool = nk

        # ---- locate the cutoff prefix ----
        prefmask[0] = A_mask
        chain[0] = fA
        pm = A_mask
        for i in range(1, d + 1):
            pm |= (<unsigned long long> 1) << seq[i - 1]
            prefmask[i] = pm
            chain[i] = table[shift | pm]
        acc = 0.0
        dsum[0] = 0.0
        for i in range(1, d + 1):
            dj = chain[i] - chain[i - 1]
            if dj < 0.0:
                acc += -dj
            else:
                acc += 0.0
            dsum[i] = acc
        for j in range(m):
            cL[j] = costs[L[j]]
            ext[j] = fA + Lmarg[j]
            feas[j] = 1
        cached[0] = 1
        for i in range(1, d + 1):
            cached[i] = 0
        acc = 0.0
        for j in range(m):
            acc += cL[j]
        # acc is now c(L)

        if not binary:
            for i in range(1, d + 1):
                for j in range(m):
                    bit = (<unsigned long long> 1) << L[j]
                    ext[i * CAP + j] = table[shift | prefmask[i] | bit]
                    feas[i * CAP + j] = indep[root | prefmask[i] | bit]
                cached[i] = 1
            _round(met, d + (d + 1) * m)
            met[3] += d * m
            t1 = 0
            while not _pred_cost(t1, m, ext, feas, chain, cL, rho, eps, acc):
                t1 += 1
            t2 = 0
            while not _pred_damage(t2, m, ext, feas, chain, cL, rho, eps, dsum):
                t2 += 1
        else:
            _round(met, d)
            lo1 = 1
            hi1 = d
            lo2 = 1
            hi2 = d
            while lo1 < hi1 or lo2 < hi2:
                nnew = 0
                if lo1 < hi1:
                    mid = (lo1 + hi1) >> 1
                    if not cached[mid]:
                        for j in range(m):
                            bit = (<unsigned long long> 1) << L[j]
                            ext[mid * CAP + j] = table[shift | prefmask[mid] | bit]
                            feas[mid * CAP + j] = indep[root | prefmask[mid] | bit]
                        cached[mid] = 1
                        nnew += 1
                if lo2 < hi2:
                    mid = (lo2 + hi2) >> 1
                    if not cached[mid]:
                        for j in range(m):
                            bit = (<unsigned long long> 1) << L[j]
                            ext[mid * CAP + j] = table[shift | prefmask[mid] | bit]
                            feas[mid * CAP + j] = indep[root | prefmask[mid] | bit]
                        cached[mid] = 1
                        nnew += 1
                if nnew:
                    _round(met, (<long long> nnew) * m)
                    met[3] += (<long long> nnew) * m
                if lo1 < hi1:
                    mid = (lo1 + hi1) >> 1
                    if _pred_cost(mid, m, ext, feas, chain, cL, rho, eps, acc):
                        hi1 = mid
                    else:
                        lo1 = mid + 1
                if lo2 < hi2:
                    mid = (lo2 + hi2) >> 1
                    if _pred_damage(mid, m, ext, feas, chain, cL, rho, eps, dsum):
                        hi2 = mid
                    else:
                        lo2 = mid + 1
            t1 = lo1
            t2 = lo2
        tstar = t1 if t1 < t2 else t2
        if tstar < 1:
            raise AssertionError("no progress: stopping rules fired at the empty prefix")

        # ---- commit or discard the batch ----
        pm = 0
        for i in range(tstar):
            U_out[nU] = seq[i]
            nU += 1
            pm |= (<unsigned long long> 1) << seq[i]
        ns = 0
        for j in range(m):
            if (pm >> L[j]) & 1:
                surv[j] = 0
            else:
                surv[j] = 1
                ns += 1
        if p >= 1.0:
            accept = 1
        else:
            accept = 1 if _next(bg) < p else 0
        if accept:
            if t2 < t1:
                count += 1
            if cached[tstar]:
                for j in range(m):
                    if surv[j]:
                        rvals[j] = ext[tstar * CAP + j]
                        rfeas[j] = feas[tstar * CAP + j]
            elif ns > 0:
                for j in range(m):
                    if surv[j]:
                        bit = (<unsigned long long> 1) << L[j]
                        rvals[j] = table[shift | prefmask[tstar] | bit]
                        rfeas[j] = indep[root | prefmask[tstar] | bit]
                _round(met, ns)
                met[3] += ns
            A_mask |= pm
            fA = chain[tstar]
            newm = 0
            for j in range(m):
                if not surv[j]:
                    continue
                marg = rvals[j] - fA
                if rfeas[j] and (marg / cL[j]) >= rho:
                    newL[newm] = L[j]
                    newmarg[newm] = marg
                    newm += 1
            for j in range(newm):
                L[j] = newL[j]
                Lmarg[j] = newmarg[j]
            m = newm
        else:
            newm = 0
            for j in range(m):
                if surv[j]:
                    newL[newm] = L[j]
                    newmarg[newm] = Lmarg[j]
                    newm += 1
            for j in range(newm):
                L[j] = newL[j]
                Lmarg[j] = newmarg[j]
            m = newm

    A_out[0] = A_mask
    pm = 0
    for j in range(m):
        pm |= (<unsigned long long> 1) << L[j]
    L_out[0] = pm
    nU_out[0] = nU
    count_out[0] = count
    fA_out[0] = fA
    f0_out[0] = f0
    return 0


cdef bitgen_t* _bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    cdef const char* name = "BitGenerator"
    if not PyCapsule_IsValid(capsule, name):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, name)


cdef _check(const double[::1] table, const unsigned char[::1] indep,
            const double[::1] costs, unsigned long long mask):
    cdef int n = costs.shape[0]
    if n > CAP:
        raise ValueError("kernel supports at most %d elements" % CAP)
    if table.shape[0] != (1 << n) or indep.shape[0] != (1 << n):
        raise ValueError("table sizes must be 2^n")
    if n < 64 and (mask >> n) != 0:
        raise ValueError("mask references elements outside the ground set")
    return n


def rand_batch_masked(const double[::1] table, const unsigned char[::1] indep,
                      const double[::1] costs,
                      unsigned long long shift, unsigned long long root,
                      unsigned long long I_mask, double rho, long long M,
                      double p, double eps, int binary, object bit_generator):
    """Full batch-selection run over dense tables.

    Returns (A_mask, U_ids, L_mask, count, fA, f0, queries, rounds,
    max_queries_per_round, independence_checks).
    """
    cdef int n = _check(table, indep, costs, I_mask)
    cdef bitgen_t* bg = _bitgen(bit_generator)
    cdef long long met[4]
    cdef unsigned long long A_mask = 0, L_mask = 0
    cdef int U[20]
    cdef int nU = 0
    cdef long long count = 0
    cdef double fA = 0.0, f0 = 0.0
    met[0] = 0
    met[1] = 0
    met[2] = 0
    met[3] = 0
    _rb_core(table, indep, costs, shift, root, I_mask, rho, M, p, eps,
             binary, n, bg, met, &A_mask, &L_mask, U, &nU, &count, &fA, &f0)
    return (int(A_mask), [U[i] for i in range(nU)], int(L_mask), int(count),
            float(fA), float(f0), int(met[0]), int(met[1]), int(met[2]), int(met[3]))


def probe_masked(const double[::1] table, const unsigned char[::1] indep,
                 const double[::1] costs,
                 unsigned long long N1_mask, unsigned long long N2_mask,
                 double rho, long long M, double eps, int binary,
                 object bit_generator):
    """One probe branch over dense tables: two batch selections on the
    expensive side, a one-element boost for each, and a random-subset
    pass over the cheap side joined with the first selection.

    Returns (S_mask, value, queries, rounds, max_queries_per_round,
    independence_checks).
    """
    cdef int n = _check(table, indep, costs, N1_mask | N2_mask)
    cdef bitgen_t* bg = _bitgen(bit_generator)
    cdef long long met[4]
    cdef unsigned long long A1 = 0, A2 = 0, Lm = 0, Am, X, S3, bit, best_mask
    cdef int U[20]
    cdef int good[20]
    cdef int nU = 0, pi, u, ng, nc, bi, j
    cdef long long count = 0
    cdef double v1 = 0.0, v2 = 0.0, f0 = 0.0, vcur, best_v, bv, v
    met[0] = 0
    met[1] = 0
    met[2] = 0
    met[3] = 0
    _rb_core(table, indep, costs, 0, 0, N1_mask, rho, M, 1.0, eps,
             binary, n, bg, met, &A1, &Lm, U, &nU, &count, &v1, &f0)
    _rb_core(table, indep, costs, 0, 0, N1_mask & ~A1, rho, M, 1.0, eps,
             binary, n, bg, met, &A2, &Lm, U, &nU, &count, &v2, &f0)
    best_mask = 0
    best_v = f0
    for pi in range(2):
        Am = A1 if pi == 0 else A2
        vcur = v1 if pi == 0 else v2
        if vcur > best_v:
            best_v = vcur
            best_mask = Am
        nc = _popcount(N1_mask & ~Am)
        if nc:
            met[3] += nc
            ng = 0
            for u in range(n):
                if not ((N1_mask & ~Am) >> u) & 1:
                    continue
                bit = (<unsigned long long> 1) << u
                if indep[Am | bit]:
                    good[ng] = u
                    ng += 1
            if ng:
                _round(met, ng)
                bi = 0
                bv = -HUGE_VAL
                for j in range(ng):
                    bit = (<unsigned long long> 1) << good[j]
                    v = table[Am | bit]
                    if v > bv:
                        bv = v
                        bi = j
                if bv > best_v:
                    best_v = bv
                    best_mask = Am | ((<unsigned long long> 1) << good[bi])
    X = N2_mask | A1
    met[3] += 1
    if indep[X]:
        S3 = 0
        for u in range(n):
            if (X >> u) & 1:
                if _next(bg) < 0.5:
                    S3 |= (<unsigned long long> 1) << u
        v = table[S3]
        _round(met, 1)
        if v > best_v:
            best_v = v
            best_mask = S3
    return (int(best_mask), float(best_v), int(met[0]), int(met[1]),
            int(met[2]), int(met[3]))
