"""End-to-end acceptance: each criterion prints one verdict line and must pass.

The full set costs roughly fifteen minutes of simulation on one core; run
``pytest tests/test_acceptance.py -s`` to watch the verdict lines arrive.
"""

from bigjump import acceptance

_CACHE: dict = {}


def run_one(name):
    if name not in _CACHE:
        _CACHE[name] = acceptance.run_criteria(names=[name])[0]
    r = _CACHE[name]
    verdict = "PASS" if r.passed else "FAIL"
    print(
        f"{verdict}  {r.name}  value={r.value:.6g}  "
        f"band=[{r.lo:.6g}, {r.hi:.6g}]  {r.seconds:.1f}s"
    )
    return r


class TestAcceptance:
    def test_01_laplace_identity(self):
        r = run_one("laplace-identity")
        assert r.passed, r.detail

    def test_02_breiman_product_ratio(self):
        r = run_one("breiman-product-ratio")
        assert r.passed, r.detail

    def test_03_comonotone_product_index(self):
        r = run_one("comonotone-product-index")
        assert r.passed, r.detail

    def test_04_single_big_jump_ratio(self):
        r = run_one("single-big-jump-ratio")
        assert r.passed, r.detail

    def test_05_weak_tail_vs_series(self):
        r = run_one("weak-tail-vs-series")
        assert r.passed, r.detail

    def test_06_weak_series_vs_closed_form(self):
        r = run_one("weak-series-vs-closed-form")
        assert r.passed, r.detail

    def test_07_comonotone_tail_vs_closed_form(self):
        r = run_one("comonotone-tail-vs-closed-form")
        assert r.passed, r.detail

    def test_08_limit_measure_homogeneity(self):
        r = run_one("limit-measure-homogeneity")
        assert r.passed, r.detail

    def test_09_h_normalization_and_conditional_tail(self):
        r = run_one("h-normalization-and-conditional-tail")
        assert r.passed, r.detail

    def test_10_ruin_sandwich(self):
        r = run_one("ruin-sandwich")
        assert r.passed, r.detail

    def test_11_index_estimators(self):
        r = run_one("index-estimators")
        assert r.passed, r.detail

    def test_12_worker_determinism(self):
        r = run_one("worker-determinism")
        assert r.passed, r.detail
