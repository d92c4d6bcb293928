"""Regenerates the committed newform orbit fixtures with PARI/GP.

Each fixture records, per Galois orbit of trivial-character newforms at
(N, k): the orbit dimension, the root number (-1)^{k/2} times the Fricke
eigenvalue, whether the orbit has CM, and whether it is twist minimal.

Twist minimality is decided by comparing complex embeddings: an orbit is
non-minimal when for some prime p with p^2 | N and some primitive character
chi mod p, chi(n) a_n(f) = a_n(g) for all n <= B coprime to N, where g is a
newform of level M < N, M | N, and character chi^2.

Requires the `cypari` package. Usage:
    python3 scripts/pari_fixtures.py crates/lmfdb/fixtures
"""

import datetime
import sys
from pathlib import Path

import cypari

pari = cypari.pari
pari.allocatemem(2 * 10**9)
pari.set_real_precision(60)

FIXTURES = [(1, 12), (9, 10), (37, 2), (45, 4), (45, 6), (49, 14), (58, 2)]
TERMS = 60

GP = r"""
embeds(F, B) = my(e = mfembed(F, mfcoefs(F, B))); if (type(e[1]) == "t_VEC", e, [e]);

orbitdata(N, k) =
{
  my(mf = mfinit([N, k, 1], 0), L = mfeigenbasis(mf), fr = mfatkineigenvalues(mf, N));
  vector(#L, i, [poldegree(mfparams(L[i])[4]), fr[i][1], mfisCM(L[i]), L[i]]);
}

charvals(G, chi, B) = vector(B + 1, j, my(n = j - 1); if (gcd(n, G.mod) != 1, 0, exp(2 * Pi * I * chareval(G, chi, n))));

istwistof(Fe, chiv, ge, N, B) =
{
  my(scale = 1.);
  for (a = 1, #Fe, for (b = 1, #ge,
    my(ok = 1);
    for (n = 1, B,
      if (gcd(n, N) != 1, next);
      my(lhs = chiv[n + 1] * Fe[a][n + 1], rhs = ge[b][n + 1]);
      if (abs(lhs - rhs) > 1e-20 * (1 + abs(rhs)), ok = 0; break));
    if (ok, return (1))));
  0;
}

isminimal(F, N, k, B) =
{
  my(fa = factor(N), Fe = embeds(F, B));
  for (i = 1, #fa~,
    my(p = fa[i, 1]);
    if (fa[i, 2] < 2, next);
    my(Gp = znstar(p, 1));
    for (c = 2, p - 1,
      my(chi = znconreylog(Gp, c));
      if (znconreyconductor(Gp, chi) != p, next);
      my(chiv = charvals(Gp, chi, B));
      fordiv (N, M,
        if (M == N, next);
        if (M % p != 0 && charorder(Gp, chi) > 2, next);
        my(GM = znstar(M * p, 1), chi2 = zncharinduce(Gp, charpow(Gp, chi, 2), GM));
        my([G2, c2] = znchartoprimitive(GM, chi2));
        if (M % G2.mod != 0, next);
        my(GMM = znstar(M, 1), cM = zncharinduce(G2, c2, GMM));
        my(mfM = mfinit([M, k, [GMM, cM]], 0));
        if (mfdim(mfM) == 0, next);
        foreach (mfeigenbasis(mfM), g,
          if (istwistof(Fe, chiv, embeds(g, B), N, B), return (0))))));
  1;
}
"""


def fixture(n, k):
    sign_k = -1 if (k // 2) % 2 else 1
    count = int(pari(f"OD = orbitdata({n}, {k}); #OD"))
    rows = []
    for i in range(1, count + 1):
        dim, fricke, cm = (int(pari(f"OD[{i}][{j}]")) for j in (1, 2, 3))
        minimal = bool(int(pari(f"isminimal(OD[{i}][4], {n}, {k}, {TERMS})")))
        traces = [int(x) for x in pari(f"my(c = mfcoefs(OD[{i}][4], 20)); [trace(x) | x <- c]")]
        rows.append((dim, sign_k * fricke, cm != 0, minimal, traces))
    # Database order: by dimension, then by the trace form.
    rows.sort(key=lambda r: (r[0], r[4]))
    return rows


def letters(i):
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = chr(ord("a") + r) + s
    return s


def write(out_dir, n, k, rows):
    stamp = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")
    lines = [
        "schema_version = 1",
        f"level = {n}",
        f"weight = {k}",
        f'fetched_at = "{stamp}"',
        f'source = "PARI/GP {".".join(map(str, pari.version()))} mfinit/mfatkineigenvalues"',
        "",
    ]
    for i, (dim, sign, cm, minimal, *_rest) in enumerate(rows):
        lines += [
            "[[orbits]]",
            f"level = {n}",
            f"weight = {k}",
            f'orbit_label = "{n}.{k}.a.{letters(i)}"',
            f"orbit_dim = {dim}",
            f"root_number_sign = {sign}",
            f"is_twist_minimal = {'true' if minimal else 'false'}",
            f"is_cm = {'true' if cm else 'false'}",
            'sign_source = "fricke_eigenval"',
            "",
        ]
    (Path(out_dir) / f"N{n}_k{k}.toml").write_text("\n".join(lines))


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "crates/lmfdb/fixtures"
    for chunk in GP.strip().split("\n\n"):
        pari(" ".join(line.strip() for line in chunk.splitlines()))
    for n, k in FIXTURES:
        rows = fixture(n, k)
        write(out_dir, n, k, rows)
        summary = [(r[0], r[1], r[2], r[3]) for r in rows]
        print(n, k, summary)


if __name__ == "__main__":
    main()
