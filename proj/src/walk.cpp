#include "sawlab/walk.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "sawlab/errors.hpp"
#include "site_codec.hpp"

namespace sawlab {

Step Step::from_code(int code) {
  if (code == 0) throw InvalidPath("step code 0 is not a unit vector");
  return Step(std::abs(code) - 1, code > 0 ? 1 : -1);
}

LatticePath::LatticePath(int dimension, std::vector<Step> steps)
    : dimension_(dimension), steps_(std::move(steps)) {
  if (dimension_ < 1) throw InvalidPath("dimension must be positive");
  const auto d = static_cast<std::size_t>(dimension_);
  sites_.assign((steps_.size() + 1) * d, 0);
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const Step s = steps_[i];
    if (s.axis() < 0 || s.axis() >= dimension_) {
      throw InvalidPath("step axis out of range for dimension");
    }
    std::copy_n(sites_.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                sites_.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    sites_[(i + 1) * d + static_cast<std::size_t>(s.axis())] += s.sign();
  }
}

LatticePath LatticePath::from_sites(int dimension,
                                    std::span<const Coord> sites) {
  if (dimension < 1) throw InvalidPath("dimension must be positive");
  const auto d = static_cast<std::size_t>(dimension);
  if (sites.empty() || sites.size() % d != 0) {
    throw InvalidPath("site buffer is not a whole number of sites");
  }
  const std::size_t count = sites.size() / d;
  std::vector<Step> steps;
  steps.reserve(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    int axis = -1;
    int sign = 0;
    int l1 = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const Coord delta = sites[(i + 1) * d + k] - sites[i * d + k];
      if (delta != 0) {
        l1 += std::abs(delta);
        axis = static_cast<int>(k);
        sign = delta;
      }
    }
    if (l1 != 1) throw InvalidPath("consecutive sites are not neighbours");
    steps.emplace_back(axis, sign);
  }
  return LatticePath(dimension, std::move(steps));
}

LatticePath LatticePath::reversed() const {
  std::vector<Step> rev;
  rev.reserve(steps_.size());
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    rev.push_back(it->reversed());
  }
  return LatticePath(dimension_, std::move(rev));
}

namespace {

std::int64_t pairs(std::int64_t k) { return k * (k - 1) / 2; }

std::int64_t max_abs_coord(const LatticePath& path) {
  std::int64_t m = 0;
  for (Coord c : path.sites()) m = std::max<std::int64_t>(m, std::abs(c));
  return m;
}

// Visit counts per site; packed keys when the walk fits the codec.
template <typename Fn>
void for_each_visit_count(const LatticePath& path, Fn&& fn) {
  const int d = path.dimension();
  const std::size_t count = path.length() + 1;
  if (detail::SiteCodec::fits(d, max_abs_coord(path))) {
    detail::SiteCodec codec(d);
    absl::flat_hash_map<std::uint64_t, std::pair<std::int64_t, std::size_t>>
        visits;
    visits.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto [it, fresh] = visits.try_emplace(codec.encode(path.site(i)), 0, i);
      ++it->second.first;
    }
    for (const auto& [key, entry] : visits) fn(path.site(entry.second), entry.first);
  } else {
    std::map<std::vector<Coord>, std::int64_t> visits;
    for (std::size_t i = 0; i < count; ++i) {
      auto s = path.site(i);
      ++visits[std::vector<Coord>(s.begin(), s.end())];
    }
    for (const auto& [site, k] : visits) fn(std::span<const Coord>(site), k);
  }
}

}  // namespace

SiltPointProcess silt(const LatticePath& path) {
  SiltPointProcess phi;
  phi.dimension = path.dimension();
  for_each_visit_count(path, [&](std::span<const Coord> site, std::int64_t k) {
    if (k < 2) return;
    phi.points.push_back({std::vector<Coord>(site.begin(), site.end()), pairs(k)});
    phi.total += pairs(k);
  });
  std::sort(phi.points.begin(), phi.points.end(),
            [](const SiltPoint& a, const SiltPoint& b) { return a.site < b.site; });
  return phi;
}

std::int64_t silt_total(const LatticePath& path) {
  std::int64_t total = 0;
  for_each_visit_count(path, [&](std::span<const Coord>, std::int64_t k) {
    total += pairs(k);
  });
  return total;
}

namespace {
std::int64_t norm2(std::span<const Coord> x) {
  std::int64_t s = 0;
  for (Coord c : x) s += std::int64_t{c} * c;
  return s;
}
}  // namespace

std::int64_t endpoint_distance2(const LatticePath& path) {
  return norm2(path.site(path.length()));
}

double endpoint_distance(const LatticePath& path) {
  return std::sqrt(static_cast<double>(endpoint_distance2(path)));
}

double hull_radius(const LatticePath& path) {
  std::int64_t best = 0;
  for (std::size_t i = 0; i <= path.length(); ++i) {
    best = std::max(best, norm2(path.site(i)));
  }
  return std::sqrt(static_cast<double>(best));
}

PathObservables observe(const LatticePath& path) {
  PathObservables obs;
  obs.chi2 = endpoint_distance2(path);
  obs.chi = std::sqrt(static_cast<double>(obs.chi2));
  obs.hull_radius = hull_radius(path);
  obs.silt = silt(path);
  return obs;
}

std::string format_path(const LatticePath& path) {
  std::ostringstream out;
  out << path.dimension() << ':' << path.length() << ':';
  bool first = true;
  for (Step s : path.steps()) {
    if (!first) out << ' ';
    first = false;
    out << (s.sign() > 0 ? '+' : '-') << (s.axis() + 1);
  }
  return out.str();
}

namespace {
int parse_int(std::string_view text, const char* what) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidPath(std::string("malformed ") + what + " in path line");
  }
  return value;
}
}  // namespace

LatticePath parse_path(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r' ||
                           line.back() == ' ')) {
    line.remove_suffix(1);
  }
  const auto c1 = line.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : line.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw InvalidPath("expected d:n:steps");
  const int d = parse_int(line.substr(0, c1), "dimension");
  const int n = parse_int(line.substr(c1 + 1, c2 - c1 - 1), "length");
  if (d < 1 || n < 0) throw InvalidPath("dimension/length out of range");
  std::vector<Step> steps;
  std::string_view rest = line.substr(c2 + 1);
  while (!rest.empty()) {
    const auto sp = rest.find(' ');
    std::string_view tok = rest.substr(0, sp);
    if (!tok.empty()) {
      // Accept both ASCII '-' and the typographic minus sign.
      std::string buf(tok);
      if (buf.rfind("\xE2\x88\x92", 0) == 0) buf.replace(0, 3, "-");
      const int code = parse_int(buf, "step");
      if (code == 0 || std::abs(code) > d) throw InvalidPath("step axis out of range");
      steps.push_back(Step::from_code(code));
    }
    if (sp == std::string_view::npos) break;
    rest.remove_prefix(sp + 1);
  }
  if (steps.size() != static_cast<std::size_t>(n)) {
    throw InvalidPath("step count does not match declared length");
  }
  return LatticePath(d, std::move(steps));
}

}  // namespace sawlab
