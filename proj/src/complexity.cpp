#include "oxicopd/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "oxicopd/error.hpp"
#include "oxicopd/summary_stats.hpp"

namespace oxicopd {

namespace {

// Distinct embedding vectors with their multiplicities, sorted lexicographically.
// Real SpO2 is heavily quantized, so the distinct set is tiny compared with n.
struct TemplateSet {
  std::size_t dim = 0;
  std::vector<double> values; // distinct templates, row-major
  std::vector<std::uint64_t> counts;

  std::size_t size() const { return counts.size(); }
  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

TemplateSet build_templates(std::span<const double> s, std::size_t dim, std::size_t count) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  const auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(s.begin() + a, s.begin() + a + dim, s.begin() + b, s.begin() + b + dim);
  };
  std::sort(order.begin(), order.end(), less);
  TemplateSet t;
  t.dim = dim;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = order[k];
    if (k > 0 && std::equal(s.begin() + i, s.begin() + i + dim, s.begin() + order[k - 1])) {
      ++t.counts.back();
      continue;
    }
    t.values.insert(t.values.end(), s.begin() + i, s.begin() + i + dim);
    t.counts.push_back(1);
  }
  return t;
}

// For each distinct template u, the number of (non-distinct) templates within
// Chebyshev distance r of u, itself included.
std::vector<std::uint64_t> neighbour_counts(const TemplateSet& t, double r) {
  const std::size_t d = t.size();
  std::vector<double> first(d);
  for (std::size_t i = 0; i < d; ++i) first[i] = t.row(i)[0];
  std::vector<std::uint64_t> out(d, 0);
  for (std::size_t u = 0; u < d; ++u) {
    const double* a = t.row(u);
    // widened band; the exact test below decides membership
    const double slack = r + 1e-9 * (std::abs(a[0]) + r);
    auto lo = static_cast<std::size_t>(std::lower_bound(first.begin(), first.end(), a[0] - slack) - first.begin());
    std::uint64_t c = 0;
    for (std::size_t v = lo; v < d && first[v] <= a[0] + slack; ++v) {
      const double* b = t.row(v);
      bool match = true;
      for (std::size_t k = 0; k < t.dim; ++k) {
        if (std::abs(a[k] - b[k]) > r) {
          match = false;
          break;
        }
      }
      if (match) c += t.counts[v];
    }
    out[u] = c;
  }
  return out;
}

double phi(std::span<const double> s, std::size_t dim, double r) {
  const std::size_t count = s.size() - dim + 1;
  const auto t = build_templates(s, dim, count);
  const auto c = neighbour_counts(t, r);
  const auto total = static_cast<double>(count);
  double acc = 0;
  for (std::size_t u = 0; u < t.size(); ++u) {
    acc += static_cast<double>(t.counts[u]) * std::log(static_cast<double>(c[u]) / total);
  }
  return acc / total;
}

std::uint64_t matching_pairs(std::span<const double> s, std::size_t dim, std::size_t count, double r) {
  const auto t = build_templates(s, dim, count);
  const auto c = neighbour_counts(t, r);
  std::uint64_t ordered = 0;
  for (std::size_t u = 0; u < t.size(); ++u) ordered += t.counts[u] * c[u];
  return (ordered - count) / 2;
}

void require_length(std::span<const double> s, std::size_t m) {
  if (s.size() < m + 2) throw Error("entropy estimate needs at least m + 2 samples");
  if (m == 0) throw Error("embedding dimension must be >= 1");
}

} // namespace

double approx_entropy(std::span<const double> s, std::size_t m, double r) {
  require_length(s, m);
  if (!(r >= 0)) throw Error("tolerance must be non-negative");
  return phi(s, m, r) - phi(s, m + 1, r);
}

double approx_entropy(std::span<const double> s, const ComplexityParams& p) {
  require_length(s, p.m);
  const double sd = stats::pop_sd(s);
  if (sd == 0) return 0.0;
  return approx_entropy(s, p.m, p.r_factor * sd);
}

SampEnResult sample_entropy(std::span<const double> s, std::size_t m, double r) {
  require_length(s, m);
  if (!(r >= 0)) throw Error("tolerance must be non-negative");
  const std::size_t count = s.size() - m;
  const auto b = matching_pairs(s, m, count, r);
  const auto a = matching_pairs(s, m + 1, count, r);
  if (a == 0 || b == 0) {
    const auto n = static_cast<double>(s.size());
    const auto md = static_cast<double>(m);
    return {std::log(n - md) + std::log(n - md - 1) - std::log(2.0), true};
  }
  return {-std::log(static_cast<double>(a) / static_cast<double>(b)), false};
}

SampEnResult sample_entropy(std::span<const double> s, const ComplexityParams& p) {
  require_length(s, p.m);
  const double sd = stats::pop_sd(s);
  if (sd == 0) return {};
  return sample_entropy(s, p.m, p.r_factor * sd);
}

std::size_t lz76_phrase_count(std::span<const unsigned char> sym) {
  const std::size_t n = sym.size();
  if (n == 0) return 0;
  if (n == 1) return 1;
  std::size_t i = 0, k = 1, l = 1, k_max = 1, c = 1;
  while (true) {
    if (sym[i + k - 1] == sym[l + k - 1]) {
      ++k;
      if (l + k > n) {
        ++c;
        break;
      }
    } else {
      k_max = std::max(k, k_max);
      ++i;
      if (i == l) {
        ++c;
        l += k_max;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        k_max = 1;
      } else {
        k = 1;
      }
    }
  }
  return c;
}

std::size_t lempel_ziv(std::span<const double> s) {
  if (s.empty()) throw Error("lempel_ziv: empty signal");
  const double med = stats::median(s);
  std::vector<unsigned char> bits(s.size());
  std::transform(s.begin(), s.end(), bits.begin(), [&](double v) { return v >= med ? 1 : 0; });
  return lz76_phrase_count(bits);
}

double central_tendency(std::span<const double> s, double rho) {
  if (s.size() < 3) throw Error("central_tendency needs at least 3 samples");
  const std::size_t points = s.size() - 2;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double d0 = s[i + 1] - s[i];
    const double d1 = s[i + 2] - s[i + 1];
    if (std::sqrt(d0 * d0 + d1 * d1) < rho) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(points);
}

double dfa_fluctuation(std::span<const double> s, std::size_t scale) {
  if (scale < 2) throw Error("DFA scale must be >= 2");
  if (s.size() < 4 * scale) throw Error("signal too short for DFA at scale " + std::to_string(scale));
  const double mu = stats::mean(s);
  std::vector<double> profile(s.size());
  double acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i] - mu;
    profile[i] = acc;
  }
  const std::size_t boxes = s.size() / scale;
  // x = 0..scale-1 is shared by every box
  const double n = static_cast<double>(scale);
  const double x_mean = (n - 1) / 2;
  const double sxx = n * (n * n - 1) / 12;
  double rss = 0;
  for (std::size_t b = 0; b < boxes; ++b) {
    const double* y = profile.data() + b * scale;
    double y_mean = 0;
    for (std::size_t k = 0; k < scale; ++k) y_mean += y[k];
    y_mean /= n;
    double sxy = 0;
    for (std::size_t k = 0; k < scale; ++k) sxy += (static_cast<double>(k) - x_mean) * (y[k] - y_mean);
    const double slope = sxy / sxx;
    for (std::size_t k = 0; k < scale; ++k) {
      const double fit = y_mean + slope * (static_cast<double>(k) - x_mean);
      rss += (y[k] - fit) * (y[k] - fit);
    }
  }
  return std::sqrt(rss / static_cast<double>(boxes * scale));
}

double dfa_exponent(std::span<const double> s, std::span<const std::size_t> scales) {
  if (scales.size() < 2) throw Error("DFA exponent needs at least two scales");
  std::vector<double> lx, ly;
  for (auto sc : scales) {
    lx.push_back(std::log(static_cast<double>(sc)));
    ly.push_back(std::log(dfa_fluctuation(s, sc)));
  }
  const double mx = stats::mean(lx), my = stats::mean(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

ComplexityBiomarkers complexity_biomarkers(std::span<const double> s, const ComplexityParams& p) {
  ComplexityBiomarkers b;
  b.apen = approx_entropy(s, p);
  const auto se = sample_entropy(s, p);
  b.sampen = se.value;
  b.sampen_capped = se.capped;
  b.lz = static_cast<double>(lempel_ziv(s));
  b.ctm = central_tendency(s, p.ctm_rho);
  b.dfa = dfa_fluctuation(s, p.dfa_scale);
  return b;
}

} // namespace oxicopd
