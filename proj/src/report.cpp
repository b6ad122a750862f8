#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "run_dir.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/experiment.hpp"
#include "sawlab/exponent.hpp"

namespace sawlab {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::format_double;
using detail::number_of;

namespace {

class CsvFile {
 public:
  CsvFile(const fs::path& file, const std::string& header) : file_(file), out_(file, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + file.string());
    out_ << header << '\n';
  }
  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << fields, first = false), ...);
    out_ << '\n';
  }
  const fs::path& path() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + file_.string());
    return file_;
  }

 private:
  fs::path file_;
  std::ofstream out_;
};

std::string num(const json& j) { return format_double(number_of(j)); }

std::string beta_label(double beta) {
  if (std::isinf(beta)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

struct Line {
  std::string label;
  double slope;
  double intercept;
  std::string colour;
};

// ln E chi^2 against ln n with fitted and reference lines.
std::string chart_svg(const MomentSeries& series, const std::vector<Line>& lines, const json& meta) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  std::vector<double> xs, ys;
  for (const auto& r : series.rows) {
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(r.mean_chi2));
  }
  double x0 = *std::min_element(xs.begin(), xs.end());
  double x1 = *std::max_element(xs.begin(), xs.end());
  if (x1 - x0 < 1e-9) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  double y0 = *std::min_element(ys.begin(), ys.end());
  double y1 = *std::max_element(ys.begin(), ys.end());
  for (const auto& l : lines) {
    for (double x : {x0, x1}) {
      y0 = std::min(y0, l.intercept + l.slope * x);
      y1 = std::max(y1, l.intercept + l.slope * x);
    }
  }
  if (y1 - y0 < 1e-9) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<metadata>" << meta.dump() << "</metadata>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << "d=" << series.d << ", beta=" << beta_label(series.beta) << ": ln E chi^2 vs ln n</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = x0 + (x1 - x0) * k / 4.0;
    const double y = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << px(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << x << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << y << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"12\">ln n</text>\n";
  int legend = 0;
  for (const auto& l : lines) {
    s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(l.intercept + l.slope * x0) << "\" x2=\"" << px(x1)
      << "\" y2=\"" << py(l.intercept + l.slope * x1) << "\" stroke=\"" << l.colour
      << "\" stroke-dasharray=\"6,3\"/>\n";
    s << "<text x=\"" << L + 10 << "\" y=\"" << T + 14 * (legend++ + 1) << "\" fill=\"" << l.colour
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << l.label << "</text>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i]) << "\" r=\"3.5\" fill=\"black\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::vector<fs::path> report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw IoError("no run directory at " + run_dir.string());
  const auto config = load_manifest(run_dir);
  const auto cells = detail::read_cells(run_dir, false);
  if (cells.empty()) throw IoError("run directory " + run_dir.string() + " holds no finished cells");

  std::vector<fs::path> written;
  const int d = config.d;
  const auto mu = mu_formula(d);

  CsvFile moments(run_dir / "moments.csv",
                  "d,n,beta,engine,Z,mean_chi,stderr_chi,mean_chi2,stderr_chi2,mean_J,stderr_J,samples");
  std::map<double, MomentSeries> by_beta;
  for (const auto& c : cells) {
    const double beta = number_of(c["beta"]);
    moments.row(c["d"].get<int>(), c["n"].get<int>(), num(c["beta"]), c["engine"].get<std::string>(),
                num(c["Z"]), num(c["chi"]["mean"]), num(c["chi"]["stderr"]), num(c["chi2"]["mean"]),
                num(c["chi2"]["stderr"]), num(c["J"]["mean"]), num(c["J"]["stderr"]),
                c["samples"].get<std::uint64_t>());
    auto& series = by_beta[beta];
    series.d = d;
    series.beta = beta;
    MomentRow row;
    row.n = c["n"].get<int>();
    row.mean_chi = number_of(c["chi"]["mean"]);
    row.mean_chi2 = number_of(c["chi2"]["mean"]);
    row.stderr_chi = number_of(c["chi"]["stderr"]);
    row.stderr_chi2 = number_of(c["chi2"]["stderr"]);
    row.source = config.engine == Engine::exact ? MomentSource::exact : MomentSource::mcmc;
    series.rows.push_back(row);
  }
  written.push_back(moments.path());

  CsvFile exponents(run_dir / "exponents.csv", "d,beta,observable,n_min,n_max,nu_hat,ci,mu_formula,gap");
  CsvFile theorem(run_dir / "theorem.csv", "d,beta,n,mu_formula,chi_rescaled,chi2_rescaled");
  for (auto& [beta, series] : by_beta) {
    std::sort(series.rows.begin(), series.rows.end(), [](auto& a, auto& b) { return a.n < b.n; });
    const auto th = theorem_report(series, d, beta);
    for (std::size_t i = 0; i < th.n.size(); ++i) {
      theorem.row(d, beta_label(beta), th.n[i], format_double(th.mu), format_double(th.chi.values[i]),
                  format_double(th.chi2.values[i]));
    }
    if (series.rows.size() < 3) continue;
    const FitWindow all{series.rows.front().n, series.rows.back().n};
    std::optional<ExponentFit> chi2_fit;
    for (auto obs : {FitObservable::chi, FitObservable::chi2}) {
      const auto fit = fit_exponent(series, obs, all);
      exponents.row(d, beta_label(beta), observable_name(obs), fit.n_min, fit.n_max, format_double(fit.nu_hat),
                    format_double(fit.half_width), format_double(mu.value()),
                    format_double(fit.nu_hat - mu.value()));
      if (obs == FitObservable::chi2) chi2_fit = fit;
    }

    std::vector<Line> lines;
    const auto& last = series.rows.back();
    const double lx = std::log(static_cast<double>(last.n));
    const double ly = std::log(last.mean_chi2);
    auto through_last = [&](std::string label, double slope, std::string colour) {
      lines.push_back({std::move(label), slope, ly - slope * lx, std::move(colour)});
    };
    lines.push_back({"fit: slope " + format_double(2.0 * chi2_fit->nu_hat), 2.0 * chi2_fit->nu_hat,
                     chi2_fit->intercept, "black"});
    through_last("reference 2 mu(d) = " + std::to_string(2 * mu.num) + "/" + std::to_string(mu.den), 2.0 * mu.value(),
                 "#d62728");
    json refs = {{"two_mu", 2.0 * mu.value()}};
    if (beta == 0.0) {
      through_last("simple random walk slope 1", 1.0, "#1f77b4");
      refs["srw"] = 1.0;
    }
    if (d == 3) {
      through_last("simulation literature 2 x 0.59", 1.18, "#2ca02c");
      refs["literature"] = 1.18;
    }
    const json meta = {{"d", d}, {"beta", detail::number(beta)}, {"fitted_slope", 2.0 * chi2_fit->nu_hat},
                       {"reference_slopes", refs}};
    const auto svg = run_dir / ("chart_beta_" + beta_label(beta) + ".svg");
    std::ofstream out(svg, std::ios::binary);
    if (!out) throw IoError("cannot write " + svg.string());
    out << chart_svg(series, lines, meta);
    if (!out) throw IoError("write failed for " + svg.string());
    written.push_back(svg);
  }
  written.push_back(exponents.path());
  written.push_back(theorem.path());

  CsvFile shape(run_dir / "shape.csv", "n,beta,r,class_size,class_silt,flagged");
  CsvFile cond(run_dir / "conditionD.csv", "n,beta,class_r,r1,r2,rho_n,degenerate,I_over_g,ensemble,conditioned");
  for (const auto& c : cells) {
    if (!c.contains("cone") || !c["cone"].contains("shape")) continue;
    const auto& cone = c["cone"];
    for (const auto& row : cone["shape"]) {
      shape.row(c["n"].get<int>(), num(c["beta"]), num(row["r"]), num(row["class_size"]), num(row["class_silt"]),
                num(row["flagged"]));
    }
    const auto& cd = cone["condition_d"];
    if (!cd.contains("r1")) continue;
    cond.row(c["n"].get<int>(), num(c["beta"]), num(cd["class_r"]), num(cd["r1"]), num(cd["r2"]), num(cd["rho_n"]),
             cd["degenerate"].get<bool>() ? "true" : "false", num(cd["I_over_g"]),
             cone["ensemble"].get<std::size_t>(), cone["conditioned"].get<std::size_t>());
  }
  written.push_back(shape.path());
  written.push_back(cond.path());
  return written;
}

}  // namespace sawlab
