"""Dense linear algebra over the cyclotomic field (entries are CycScalar)."""

from __future__ import annotations

from .scalars import sign_of_real

__all__ = [
    "zeros",
    "identity",
    "matmul",
    "dagger",
    "rref",
    "rank",
    "nullspace",
    "column_basis",
    "intersect",
    "hermitian_inertia",
    "restrict_form",
]


def zeros(ctx, r, c):
    z = ctx.zero()
    return [[z] * c for _ in range(r)]


def identity(ctx, n):
    M = zeros(ctx, n, n)
    for i in range(n):
        M[i][i] = ctx.one()
    return M


def matmul(A, B, ctx):
    if not A or not B:
        return zeros(ctx, len(A), len(B[0]) if B else 0)
    inner = len(B)
    out = []
    for row in A:
        out_row = []
        for j in range(len(B[0])):
            acc = ctx.zero()
            for k in range(inner):
                x = row[k]
                if not x.is_zero():
                    y = B[k][j]
                    if not y.is_zero():
                        acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out


def dagger(A):
    if not A:
        return []
    return [[A[i][j].conjugate() for i in range(len(A))] for j in range(len(A[0]))]


def rref(M):
    """Reduced row echelon form; returns ``(R, pivot_columns)``."""
    R = [list(r) for r in M]
    if not R:
        return R, []
    rows, cols = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if not R[i][c].is_zero()), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = R[r][c].inverse()
        R[r] = [x * inv for x in R[r]]
        for i in range(rows):
            if i != r and not R[i][c].is_zero():
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(M):
    return len(rref(M)[1])


def nullspace(M, ncols, ctx):
    """Basis (list of column vectors) of ``{v : M v = 0}``."""
    if not M:
        return [[ctx.one() if i == j else ctx.zero() for i in range(ncols)] for j in range(ncols)]
    R, piv = rref(M)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [ctx.zero()] * ncols
        v[f] = ctx.one()
        for r, pc in enumerate(piv):
            v[pc] = -R[r][f]
        basis.append(v)
    return basis


def column_basis(vectors, ctx):
    """A basis for the span of ``vectors`` (each a list of scalars)."""
    if not vectors:
        return []
    R, piv = rref([list(v) for v in vectors])
    return [R[i] for i in range(len(piv))]


def intersect(U, W, dim, ctx):
    """Basis of ``span(U) ∩ span(W)`` inside ``K^dim``."""
    if not U or not W:
        return []
    # solve sum a_i u_i - sum b_j w_j = 0
    M = [[u[k] for u in U] + [-w[k] for w in W] for k in range(dim)]
    out = []
    for sol in nullspace(M, len(U) + len(W), ctx):
        v = [ctx.zero()] * dim
        for coef, u in zip(sol[: len(U)], U):
            if not coef.is_zero():
                v = [x + coef * y for x, y in zip(v, u)]
        out.append(v)
    return column_basis(out, ctx)


def restrict_form(G, basis, ctx):
    """Gram matrix of the sesquilinear form ``G`` on the span of ``basis``.

    Entry ``(p, q)`` is ``conj(b_p)^T G b_q``.
    """
    n = len(basis)
    out = zeros(ctx, n, n)
    Gb = [[sum((G[i][k] * b[k] for k in range(len(b)) if not b[k].is_zero()), ctx.zero()) for i in range(len(G))] for b in basis]
    for p, bp in enumerate(basis):
        for q in range(n):
            acc = ctx.zero()
            col = Gb[q]
            for i, x in enumerate(bp):
                if not x.is_zero() and not col[i].is_zero():
                    acc = acc + x.conjugate() * col[i]
            out[p][q] = acc
    return out


class NonRealPivot(ArithmeticError):
    pass


def hermitian_inertia(M, ctx):
    """``(n_plus, n_minus, nullity)`` of a Hermitian matrix by congruence."""
    n = len(M)
    A = [list(r) for r in M]
    for i in range(n):
        for j in range(i, n):
            if A[i][j] != A[j][i].conjugate():
                raise ValueError("matrix is not Hermitian")
    plus = minus = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if not A[i][i].is_zero()), None)
        if p is None:
            pair = next(((i, j) for i in active for j in active if i != j and not A[i][j].is_zero()), None)
            if pair is None:
                break
            i, j = pair
            # v_i <- e_i + lam e_j with lam = conj(A[i][j]) gives v^* A v = 2 |A_ij|^2
            lam = A[i][j].conjugate()
            for r in range(n):
                A[r][i] = A[r][i] + A[r][j] * lam
            lam_c = lam.conjugate()
            for c in range(n):
                A[i][c] = A[i][c] + A[j][c] * lam_c
            p = i
        d = A[p][p]
        if not d.is_real():
            raise NonRealPivot(f"non-real pivot {d} in Hermitian diagonalization")
        sgn = sign_of_real(d)
        if sgn > 0:
            plus += 1
        else:
            minus += 1
        dinv = d.inverse()
        for k in active:
            if k == p or A[p][k].is_zero():
                continue
            mu = A[p][k] * dinv
            mu_c = mu.conjugate()
            for r in range(n):
                A[r][k] = A[r][k] - A[r][p] * mu
            for c in range(n):
                A[k][c] = A[k][c] - A[p][c] * mu_c
        active.remove(p)
    return plus, minus, n - plus - minus
