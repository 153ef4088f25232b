#include "volopt/mc.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "volopt/parallel.hpp"

namespace volopt {

namespace {

constexpr std::int64_t kChunk = 64;  // samples per RNG substream

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Substream engine for one chunk; mt19937_64's output sequence is fully
// specified by the standard, so estimates are platform-reproducible.
std::mt19937_64 chunk_engine(std::uint64_t seed, std::int64_t chunk, std::uint64_t salt) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(salt + static_cast<std::uint64_t>(chunk))));
}

// [0,1) from the top 53 bits; std::uniform_real_distribution is
// implementation-defined and would break bitwise determinism.
double next_unit(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

// Flat term list for tight sampling loops; Polynomial::evaluate walks an
// ordered map, which is the reference these loops are tested against.
struct CompiledSet {
  int nvars = 0;
  std::vector<std::int32_t> term_count;  // per inequality
  std::vector<std::int32_t> expo;        // term-major, nvars entries per term
  std::vector<double> coeff;

  explicit CompiledSet(const SemialgebraicSet& set) : nvars(set.nvars) {
    for (const Polynomial& p : set.inequalities) {
      std::int32_t count = 0;
      for (const auto& [alpha, c] : p.terms()) {
        coeff.push_back(c);
        for (int i = 0; i < nvars; ++i)
          expo.push_back(i < static_cast<int>(alpha.size()) ? alpha[i] : 0);
        ++count;
      }
      term_count.push_back(count);
    }
  }

  bool contains(const double* pt) const {
    std::size_t t = 0;
    for (std::int32_t count : term_count) {
      double value = 0.0;
      for (std::int32_t k = 0; k < count; ++k, ++t) {
        double term = coeff[t];
        const std::int32_t* e = &expo[t * nvars];
        for (int i = 0; i < nvars; ++i) {
          double power = 1.0;
          for (std::int32_t j = e[i]; j > 0; --j) power *= pt[i];
          term *= power;
        }
        value += term;
      }
      if (value < 0.0) return false;
    }
    return true;
  }
};

struct BoxSampler {
  std::vector<double> lower;
  std::vector<double> width;

  BoxSampler(const std::vector<double>& lo, const std::vector<double>& up) : lower(lo) {
    width.resize(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) width[i] = up[i] - lo[i];
  }

  void draw(std::mt19937_64& eng, double* pt) const {
    for (std::size_t i = 0; i < lower.size(); ++i) pt[i] = lower[i] + width[i] * next_unit(eng);
  }
};

std::int64_t chunk_count(std::int64_t n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

bool SemialgebraicSet::contains(const std::vector<double>& x) const {
  for (const Polynomial& p : inequalities)
    if (p.evaluate(x) < 0.0) return false;
  return true;
}

void SemialgebraicSet::validate() const {
  if (nvars < 1) throw std::invalid_argument("SemialgebraicSet: nvars must be positive");
  for (const Polynomial& p : inequalities)
    if (p.nvars() != nvars)
      throw std::invalid_argument("SemialgebraicSet: inequality arity mismatch");
}

SemialgebraicSet at_parameters(const std::vector<Polynomial>& joint, int x_dim,
                               const std::vector<double>& a) {
  if (x_dim < 1) throw std::invalid_argument("at_parameters: x_dim must be positive");
  std::vector<Polynomial> subs;
  subs.reserve(x_dim + a.size());
  for (int i = 0; i < x_dim; ++i) subs.push_back(Polynomial::variable(x_dim, i));
  for (double ai : a) subs.push_back(Polynomial::constant(x_dim, ai));

  SemialgebraicSet out;
  out.nvars = x_dim;
  for (const Polynomial& p : joint) {
    if (p.nvars() != x_dim + static_cast<int>(a.size()))
      throw std::invalid_argument("at_parameters: polynomial arity mismatch");
    out.inequalities.push_back(p.compose(subs));
  }
  return out;
}

McEstimate mc_volume(const SemialgebraicSet& set, const MeasureSpec& mu,
                     const SampleBudget& budget) {
  set.validate();
  mu.validate();
  if (mu.kind != MeasureSpec::Kind::LebesgueBox && mu.kind != MeasureSpec::Kind::UniformBox)
    throw std::invalid_argument("mc_volume: measure must be of box type");
  if (mu.nvars() != set.nvars)
    throw std::invalid_argument("mc_volume: measure/set dimension mismatch");
  if (budget.n_samples < 1) throw std::invalid_argument("mc_volume: n_samples must be >= 1");

  const CompiledSet compiled(set);
  const BoxSampler sampler(mu.lower, mu.upper);
  const std::int64_t n = budget.n_samples;
  const std::int64_t chunks = chunk_count(n);
  std::vector<std::int64_t> chunk_hits(chunks, 0);

  auto run_chunk = [&](std::int64_t c) {
    std::mt19937_64 eng = chunk_engine(budget.seed, c, /*salt=*/0x5eed0001ULL);
    std::vector<double> pt(set.nvars);
    std::int64_t hits = 0;
    const std::int64_t hi = std::min(n, (c + 1) * kChunk);
    for (std::int64_t s = c * kChunk; s < hi; ++s) {
      sampler.draw(eng, pt.data());
      if (compiled.contains(pt.data())) ++hits;
    }
    chunk_hits[c] = hits;
  };

  if (parallel_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  }

  std::int64_t hits = 0;
  for (std::int64_t c = 0; c < chunks; ++c) hits += chunk_hits[c];

  const double mass = mu.mass();
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  McEstimate out;
  out.hits = hits;
  out.n_samples = n;
  out.estimate = mass * p;
  out.stderr_est = mass * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return out;
}

InclusionReport inclusion_check(const SemialgebraicSet& s1, const SemialgebraicSet& s2,
                                const SampleBudget& budget) {
  s1.validate();
  s2.validate();
  if (s1.nvars != s2.nvars)
    throw std::invalid_argument("inclusion_check: set dimension mismatch");
  if (budget.n_samples < 1)
    throw std::invalid_argument("inclusion_check: n_samples must be >= 1");

  InclusionReport out;
  if (s2.inequalities.empty()) return out;  // whole space: vacuously holds

  const CompiledSet inner(s1);
  const CompiledSet outer(s2);
  const std::vector<double> lo(s1.nvars, -1.0), up(s1.nvars, 1.0);
  const BoxSampler sampler(lo, up);
  const std::int64_t n = budget.n_samples;
  const std::int64_t chunks = chunk_count(n);

  // First witness per chunk; the global answer is the smallest sample index.
  std::vector<std::int64_t> first_index(chunks, -1);
  std::vector<std::vector<double>> first_point(chunks);

  auto run_chunk = [&](std::int64_t c) {
    std::mt19937_64 eng = chunk_engine(budget.seed, c, /*salt=*/0x5eed0002ULL);
    std::vector<double> pt(s1.nvars);
    const std::int64_t hi = std::min(n, (c + 1) * kChunk);
    for (std::int64_t s = c * kChunk; s < hi; ++s) {
      sampler.draw(eng, pt.data());
      if (inner.contains(pt.data()) && !outer.contains(pt.data())) {
        first_index[c] = s;
        first_point[c] = pt;
        return;
      }
    }
  };

  if (parallel_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  }

  std::int64_t best = -1;
  for (std::int64_t c = 0; c < chunks; ++c) {
    if (first_index[c] >= 0 && (best < 0 || first_index[c] < first_index[best]))
      best = c;
  }
  if (best >= 0) {
    out.holds = false;
    out.witness = first_point[best];
  }
  return out;
}

GridSearchResult grid_search(const VolumeProblem& problem, int points_per_dim,
                             const SampleBudget& budget) {
  problem.validate();
  const int m = problem.blocks.a_dim;
  if (m < 1 || m > 3)
    throw std::invalid_argument("grid_search: supports 1 to 3 parameters");
  if (points_per_dim < 1)
    throw std::invalid_argument("grid_search: points_per_dim must be >= 1");

  const int n = problem.blocks.x_dim;
  std::int64_t total = 1;
  for (int i = 0; i < m; ++i) total *= points_per_dim;

  auto grid_point = [&](std::int64_t flat) {
    std::vector<double> a(m);
    for (int i = m - 1; i >= 0; --i) {
      const std::int64_t k = flat % points_per_dim;
      flat /= points_per_dim;
      a[i] = points_per_dim == 1
                 ? 0.0
                 : -1.0 + 2.0 * static_cast<double>(k) / (points_per_dim - 1);
    }
    return a;
  };

  std::vector<double> volumes(total, -1.0);  // -1 marks inclusion failure
  std::vector<double> errors(total, 0.0);

  auto run_point = [&](std::int64_t idx) {
    const std::vector<double> a = grid_point(idx);
    const SemialgebraicSet s1 = at_parameters(problem.s1, n, a);
    const SemialgebraicSet s2 = at_parameters(problem.s2, n, a);
    SampleBudget screen{budget.n_samples,
                        splitmix64(budget.seed ^ (2 * static_cast<std::uint64_t>(idx) + 1))};
    if (!inclusion_check(s1, s2, screen).holds) return;
    SampleBudget score{budget.n_samples,
                       splitmix64(budget.seed ^ (2 * static_cast<std::uint64_t>(idx) + 2))};
    // Nested parallel regions in the inner estimators collapse to one thread
    // (OpenMP nesting stays off); their results are seed-determined anyway.
    const McEstimate est = mc_volume(s1, problem.mu_x, score);
    volumes[idx] = est.estimate;
    errors[idx] = est.stderr_est;
  };

  if (parallel_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t idx = 0; idx < total; ++idx) run_point(idx);
  } else {
    for (std::int64_t idx = 0; idx < total; ++idx) run_point(idx);
  }

  GridSearchResult out;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    if (volumes[idx] < 0.0) continue;
    if (!out.found || volumes[idx] > out.volume) {
      out.found = true;
      out.a = grid_point(idx);
      out.volume = volumes[idx];
      out.stderr_est = errors[idx];
    }
  }
  return out;
}

}  // namespace volopt
