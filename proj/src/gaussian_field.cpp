#include "fraisse/gaussian_field.hpp"

#include <algorithm>
#include <climits>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>

#include "fraisse/errors.hpp"
#include "fraisse/rng.hpp"

namespace fraisse {

namespace {

constexpr double kPi = std::numbers::pi;

Estimate proportion(std::size_t hits, std::size_t n, std::uint64_t seed) {
  Estimate e;
  e.n_samples = n;
  e.seed = seed;
  if (n == 0) return e;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  return e;
}

struct CompiledEvent {
  struct Term {
    std::size_t index;
    bool greater;
    double threshold;
  };
  std::vector<Term> terms;

  explicit CompiledEvent(const CylinderEvent& ev) {
    for (const auto& c : ev.constraints)
      terms.push_back({c.index, c.side == Side::Greater, to_double(c.threshold)});
  }
  bool contains(std::span<const double> row, std::size_t offset) const {
    for (const Term& t : terms) {
      const double v = row[offset + t.index];
      if (t.greater ? !(v > t.threshold) : !(v < t.threshold)) return false;
    }
    return true;
  }
};

unsigned worker_count(unsigned requested, std::size_t rows) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t min_rows_per_worker = 4096;
  return static_cast<unsigned>(std::clamp<std::size_t>(rows / min_rows_per_worker, 1, w));
}

}  // namespace

GaussianModel GaussianModel::build(const SpaceDistances& space, std::uint64_t seed) {
  const Certification cert = certify_membership(space);
  if (!cert.is_member()) throw PreconditionError("build_model: space is not a certified member");
  GaussianModel m;
  m.space_ = space;
  m.sigma_ = cert.gram.g;
  m.seed_ = seed;
  const std::size_t n = space.size();
  if (n == 0) return m;
  const EmbeddedSpace emb = embed(space);
  m.chol_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.chol_[i * n + j] = emb.coords(i, j);
  const std::vector<double> sig = m.sigma_.to_doubles();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) acc += m.chol_[i * n + k] * m.chol_[j * n + k];
      if (std::abs(acc - sig[i * n + j]) > 1e-10)
        throw PrecisionError("build_model: float factor does not reproduce sigma");
    }
  return m;
}

SampleMatrix sample(const GaussianModel& model, std::size_t count, const SampleOptions& opts) {
  const std::size_t n = model.size();
  SampleMatrix out;
  out.rows = count;
  out.cols = n;
  if (count == 0 || n == 0) return out;
  out.data.resize(count * n);
  std::vector<double> normals(count * n);

  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t base = (opts.first_row + r) * n;
      for (std::size_t j = 0; j < n; ++j) normals[r * n + j] = counter_normal(model.seed(), base + j);
    }
    const std::span<const double> z(normals.data() + begin * n, (end - begin) * n);
    const std::span<double> y(out.data.data() + begin * n, (end - begin) * n);
    kernels::lower_tri_apply(model.chol(), n, z, y, opts.isa);
  };

  const unsigned workers = worker_count(opts.workers, count);
  if (workers == 1) {
    fill(0, count);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t per = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * per;
    const std::size_t end = std::min(count, begin + per);
    if (begin >= end) break;
    pool.emplace_back(fill, begin, end);
  }
  return out;
}

void for_each_block(const GaussianModel& model, std::size_t count,
                    const std::function<void(const SampleMatrix&)>& fn, const SampleOptions& opts,
                    std::size_t block_rows) {
  for (std::size_t done = 0; done < count; done += block_rows) {
    SampleOptions o = opts;
    o.first_row = opts.first_row + done;
    fn(sample(model, std::min(block_rows, count - done), o));
  }
}

InvarianceReport invariance_check(const GaussianModel& model, const PartialIsometry& g,
                                  std::size_t n_per_group, std::size_t permutations) {
  const SpaceDistances& space = model.space();
  const std::size_t n = space.size();
  auto is_perm = [n](const std::vector<std::size_t>& v) {
    return v.size() == n && std::set<std::size_t>(v.begin(), v.end()).size() == n &&
           std::all_of(v.begin(), v.end(), [n](std::size_t i) { return i < n; });
  };
  if (!is_perm(g.domain) || !is_perm(g.codomain))
    throw PreconditionError("invariance_check: map must be a permutation of all points");
  if (!verify_isometry(space, space, g))
    throw PreconditionError("invariance_check: map is not an isometry");

  InvarianceReport rep;
  rep.exact_sigma_equal = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (model.sigma()(g.codomain[i], g.codomain[j]) != model.sigma()(g.domain[i], g.domain[j]))
        rep.exact_sigma_equal = false;

  // Group 0: plain draws. Group 1: independent draws pushed forward by g.
  rep.n_per_group = n_per_group;
  rep.permutations = permutations;
  const std::size_t total = 2 * n_per_group;
  SampleMatrix draws = sample(model, total);
  std::vector<double> pooled(draws.data);
  for (std::size_t r = n_per_group; r < total; ++r)
    for (std::size_t i = 0; i < n; ++i)
      pooled[r * n + g.codomain[i]] = draws(r, g.domain[i]);

  std::vector<double> dist(total * total);
  kernels::pairwise_sq_dist(pooled, total, pooled, total, n, dist);
  for (double& d : dist) d = std::sqrt(std::max(0.0, d));

  auto energy = [&](const std::vector<std::uint8_t>& group) {
    double cross = 0.0, within0 = 0.0, within1 = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = 0; j < total; ++j) {
        const double d = dist[i * total + j];
        if (group[i] != group[j]) cross += d;
        else if (group[i] == 0) within0 += d;
        else within1 += d;
      }
    const double m = static_cast<double>(n_per_group);
    return cross / (m * m) - within0 / (m * m) - within1 / (m * m);
  };

  std::vector<std::uint8_t> group(total, 0);
  std::fill(group.begin() + static_cast<std::ptrdiff_t>(n_per_group), group.end(), 1);
  rep.energy_statistic = energy(group);
  CounterRng rng(splitmix64(model.seed() ^ 0xE6E76E7ULL));
  std::size_t as_extreme = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = total; i-- > 1;) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
      std::swap(group[i], group[j]);
    }
    if (energy(group) >= rep.energy_statistic) ++as_extreme;
  }
  rep.p_value = static_cast<double>(1 + as_extreme) / static_cast<double>(1 + permutations);
  return rep;
}

std::optional<NonproductWitness> nonproduct_witness(const GaussianModel& model, std::size_t samples) {
  const std::size_t n = model.size();
  if (n < 2) throw PreconditionError("nonproduct_witness: need at least two points");
  NonproductWitness w;
  Rational best = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (abs(model.sigma()(i, j)) > best) {
        best = abs(model.sigma()(i, j));
        w.i = i;
        w.j = j;
      }
  if (best == 0) return std::nullopt;
  w.exact_correlation = model.sigma()(w.i, w.j);

  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for_each_block(model, samples, [&](const SampleMatrix& b) {
    for (std::size_t r = 0; r < b.rows; ++r) {
      const double x = b(r, w.i), y = b(r, w.j);
      sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
  });
  const double m = static_cast<double>(samples);
  const double cov = sxy / m - (sx / m) * (sy / m);
  const double r = cov / std::sqrt((sxx / m - (sx / m) * (sx / m)) * (syy / m - (sy / m) * (sy / m)));
  w.empirical = Estimate{r, (1.0 - r * r) / std::sqrt(m - 1.0), samples, model.seed()};
  const double z = std::atanh(r);
  const double half = 1.959963984540054 / std::sqrt(m - 3.0);
  w.ci_low = std::tanh(z - half);
  w.ci_high = std::tanh(z + half);
  return w;
}

NearOrthogonalCopy near_orthogonal_copy_scaled(const SpaceDistances& space, const Rational& c) {
  if (!(abs(c) < 1)) throw PreconditionError("near_orthogonal_copy: need |c| < 1");
  if (!certify_membership(space).is_member())
    throw PreconditionError("near_orthogonal_copy: space is not a certified member");
  const std::size_t n = space.size();
  const RationalMatrix g = gram_from_distances(space).g;
  RationalMatrix joint(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      joint(i, j) = joint(n + i, n + j) = g(i, j);
      joint(i, n + j) = joint(n + j, i) = c * g(i, j);
    }
  std::vector<std::string> labels = space.labels();
  std::vector<std::string> copy_labels;
  for (const auto& l : space.labels()) {
    std::string label = l + "'";
    while (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "'";
    copy_labels.push_back(label);
    labels.push_back(label);
  }
  NearOrthogonalCopy out;
  out.copy = SpaceDistances::from_matrix(copy_labels, space.matrix());
  out.combined = SpaceDistances::from_matrix(std::move(labels), distances_from_gram(joint));
  out.cross_scale = c;
  for (std::size_t i = 0; i < n; ++i) {
    out.map.domain.push_back(i);
    out.map.codomain.push_back(n + i);
  }
  Certification cert = certify_membership(out.combined);
  if (!cert.is_member()) throw SearchFailure("near_orthogonal_copy: combined space failed certification");
  out.certificate = std::move(cert.gram);
  return out;
}

NearOrthogonalCopy near_orthogonal_copy(const SpaceDistances& space, std::size_t k) {
  if (k == 0) throw PreconditionError("near_orthogonal_copy: k must be >= 1");
  const Rational c = k == 1 ? Rational(0) : Rational(mpz_class(1), mpz_class(static_cast<unsigned long>(k)));
  return near_orthogonal_copy_scaled(space, c);
}

std::vector<std::size_t> CylinderEvent::point_indices() const {
  std::set<std::size_t> s;
  for (const auto& c : constraints) s.insert(c.index);
  return {s.begin(), s.end()};
}

bool CylinderEvent::contains(std::span<const double> row, std::size_t offset) const {
  return CompiledEvent(*this).contains(row, offset);
}

double sheppard_orthant(double c) { return 0.25 + std::asin(c) / (2.0 * kPi); }

double gaussian_kl_exact(const RationalMatrix& joint, const RationalMatrix& product) {
  const std::size_t d = joint.size();
  if (product.size() != d) throw PreconditionError("gaussian_kl_exact: dimension mismatch");
  Rational trace = 0;
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<Rational> rhs(d);
    for (std::size_t i = 0; i < d; ++i) rhs[i] = joint(i, col);
    trace += solve_exact(product, rhs)[col];
  }
  const Rational det_p = determinant_exact(product);
  const Rational det_j = determinant_exact(joint);
  if (!(det_p > 0 && det_j > 0)) throw PreconditionError("gaussian_kl_exact: covariance not PD");
  const Rational excess = trace - Rational(static_cast<long>(d));
  const Rational ratio = det_p / det_j;
  // log of a big rational: split into log numerator - log denominator
  auto log_z = [](const mpz_class& z) {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp) * std::numbers::ln2;
  };
  const double log_ratio = log_z(ratio.get_num()) - log_z(ratio.get_den());
  return 0.5 * (to_double(excess) + log_ratio);
}

double tv_bivariate_grid(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b, double half_width,
                         std::size_t cells) {
  auto density = [](const Eigen::Matrix2d& s) {
    const Eigen::Matrix2d inv = s.inverse();
    const double norm = 1.0 / (2.0 * kPi * std::sqrt(s.determinant()));
    return [inv, norm](double x, double y) {
      const double q = inv(0, 0) * x * x + 2.0 * inv(0, 1) * x * y + inv(1, 1) * y * y;
      return norm * std::exp(-0.5 * q);
    };
  };
  const auto pa = density(a);
  const auto pb = density(b);
  const double h = 2.0 * half_width / static_cast<double>(cells);
  double l1 = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = -half_width + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < cells; ++j) {
      const double y = -half_width + (static_cast<double>(j) + 0.5) * h;
      l1 += std::abs(pa(x, y) - pb(x, y));
    }
  }
  return 0.5 * l1 * h * h;
}

MixingReport mixing_experiment(const SpaceDistances& space, const CylinderEvent& event,
                               std::span<const std::size_t> k_values, std::size_t samples,
                               std::uint64_t seed) {
  for (std::size_t idx : event.point_indices())
    if (idx >= space.size()) throw std::out_of_range("mixing_experiment: event index out of range");
  const std::size_t n = space.size();
  MixingReport rep;
  rep.seed = seed;
  rep.samples = samples;
  for (std::size_t k : k_values) {
    const NearOrthogonalCopy copy = near_orthogonal_copy(space, k);
    const GaussianModel model = GaussianModel::build(copy.combined, seed);
    const CompiledEvent ev(event);
    std::size_t hits_b = 0, hits_joint = 0;
    for_each_block(model, samples, [&](const SampleMatrix& blk) {
      for (std::size_t r = 0; r < blk.rows; ++r) {
        const bool in_b = ev.contains(blk.row(r), 0);
        hits_b += in_b;
        hits_joint += in_b && ev.contains(blk.row(r), n);
      }
    });
    MixingRow row;
    row.k = k;
    row.cross_scale = copy.cross_scale;
    row.joint = proportion(hits_joint, samples, seed);
    row.single = proportion(hits_b, samples, seed);
    row.product = row.single;
    row.product.value = row.single.value * row.single.value;
    row.product.std_error = 2.0 * row.single.value * row.single.std_error;

    const RationalMatrix joint = gram_from_distances(copy.combined).g;
    RationalMatrix product = joint;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) product(i, n + j) = product(n + j, i) = 0;
    row.kl = gaussian_kl_exact(joint, product);
    row.tv_bound = pinsker_bound(row.kl);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace {

std::size_t sym_diff_count(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += a[i] != b[i];
  return c;
}

}  // namespace

CylinderApproximation cylinder_approximation_demo(const GaussianModel& model,
                                                  const SamplePredicate& a, double epsilon,
                                                  std::size_t samples) {
  const std::size_t n = model.size();
  const SampleMatrix draws = sample(model, samples);
  std::vector<std::uint8_t> in_a(samples);
  for (std::size_t r = 0; r < samples; ++r) in_a[r] = a(draws.row(r)) ? 1 : 0;

  // thresholds j/20 for |j| <= 60
  constexpr long kGrid = 60;
  std::vector<Rational> grid;
  for (long j = -kGrid; j <= kGrid; ++j) {
    Rational t(mpz_class(j), mpz_class(20));
    t.canonicalize();
    grid.push_back(t);
  }
  auto constraint_mask = [&](const ThresholdConstraint& c) {
    const double t = to_double(c.threshold);
    std::vector<std::uint8_t> m(samples);
    for (std::size_t r = 0; r < samples; ++r) {
      const double v = draws(r, c.index);
      m[r] = c.side == Side::Greater ? v > t : v < t;
    }
    return m;
  };
  auto event_mask = [&](const CylinderEvent& ev, std::size_t skip) {
    std::vector<std::uint8_t> m(samples, 1);
    for (std::size_t c = 0; c < ev.constraints.size(); ++c) {
      if (c == skip) continue;
      const auto cm = constraint_mask(ev.constraints[c]);
      for (std::size_t r = 0; r < samples; ++r) m[r] &= cm[r];
    }
    return m;
  };
  auto error_with = [&](const std::vector<std::uint8_t>& base, const ThresholdConstraint& c) {
    const auto cm = constraint_mask(c);
    std::size_t err = 0;
    for (std::size_t r = 0; r < samples; ++r) err += in_a[r] != (base[r] & cm[r]);
    return err;
  };

  CylinderEvent best;
  std::size_t best_err = sym_diff_count(in_a, event_mask(best, SIZE_MAX));
  const auto target = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(samples)));

  // greedy growth: add the single constraint that helps most, then re-tune thresholds
  while (best_err > target) {
    const auto base = event_mask(best, SIZE_MAX);
    std::optional<ThresholdConstraint> pick;
    std::size_t pick_err = best_err;
    for (std::size_t idx = 0; idx < n; ++idx)
      for (Side side : {Side::Less, Side::Greater}) {
        bool used = false;
        for (const auto& c : best.constraints) used = used || (c.index == idx && c.side == side);
        if (used) continue;
        for (const Rational& t : grid) {
          const ThresholdConstraint c{idx, side, t};
          const std::size_t err = error_with(base, c);
          if (err < pick_err) {
            pick_err = err;
            pick = c;
          }
        }
      }
    if (!pick) break;
    best.constraints.push_back(*pick);
    best_err = pick_err;

    for (int pass = 0; pass < 4 && best_err > target; ++pass) {
      bool moved = false;
      for (std::size_t c = 0; c < best.constraints.size(); ++c) {
        const auto others = event_mask(best, c);
        for (const Rational& t : grid) {
          ThresholdConstraint cand = best.constraints[c];
          if (cand.threshold == t) continue;
          cand.threshold = t;
          const std::size_t err = error_with(others, cand);
          if (err < best_err) {
            best_err = err;
            best.constraints[c] = cand;
            moved = true;
          }
        }
      }
      if (!moved) break;
    }
  }

  CylinderApproximation out;
  out.event = std::move(best);
  out.sym_diff = proportion(best_err, samples, model.seed());
  out.reached = best_err <= target;
  return out;
}

ErgodicityChain ergodicity_chain(const SpaceDistances& space, const SamplePredicate& a,
                                 const CylinderEvent& b, std::size_t k, std::size_t samples,
                                 std::uint64_t seed) {
  const std::size_t n = space.size();
  const NearOrthogonalCopy copy = near_orthogonal_copy(space, k);
  const GaussianModel model = GaussianModel::build(copy.combined, seed);
  const CompiledEvent ev(b);
  std::size_t cnt_a = 0, cnt_b = 0, cnt_aga = 0, cnt_bgb = 0, cnt_ab = 0, cnt_gagb = 0;
  for_each_block(model, samples, [&](const SampleMatrix& blk) {
    for (std::size_t r = 0; r < blk.rows; ++r) {
      const auto row = blk.row(r);
      const bool in_a = a(row.subspan(0, n));
      const bool in_ga = a(row.subspan(n, n));
      const bool in_b = ev.contains(row, 0);
      const bool in_gb = ev.contains(row, n);
      cnt_a += in_a;
      cnt_b += in_b;
      cnt_aga += in_a && in_ga;
      cnt_bgb += in_b && in_gb;
      cnt_ab += in_a != in_b;
      cnt_gagb += in_ga != in_gb;
    }
  });
  const double m = static_cast<double>(samples);
  ErgodicityChain ch;
  ch.n_samples = samples;
  ch.mu_a = static_cast<double>(cnt_a) / m;
  ch.mu_b = static_cast<double>(cnt_b) / m;
  ch.joint_a = static_cast<double>(cnt_aga) / m;
  ch.joint_b = static_cast<double>(cnt_bgb) / m;
  ch.sym_diff = static_cast<double>(cnt_ab) / m;
  ch.sym_diff_image = static_cast<double>(cnt_gagb) / m;
  ch.discrepancy = std::abs(ch.joint_a - ch.mu_a * ch.mu_a);
  ch.mixing_remainder = std::abs(ch.joint_b - ch.mu_b * ch.mu_b);
  ch.chain_bound = std::abs(ch.mu_a * ch.mu_a - ch.mu_b * ch.mu_b) + ch.sym_diff +
                   ch.sym_diff_image + ch.mixing_remainder;
  ch.four_eps_bound = 4.0 * std::max(ch.sym_diff, ch.sym_diff_image) + ch.mixing_remainder;
  return ch;
}

}  // namespace fraisse
