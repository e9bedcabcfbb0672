#include "citepred/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "citepred/csv.hpp"

namespace citepred {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fixed(double v, int decimals = 3) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string significance_stars(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::vector<CoefficientRow> coefficient_rows(const FittedLinearModel& model) {
  std::vector<CoefficientRow> rows;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    rows.push_back({model.column_names[static_cast<std::size_t>(j)], model.beta(j), model.std_errors(j),
                    model.t_stats(j), model.p_values(j)});
  }
  return rows;
}

std::vector<CoefficientRow> coefficient_rows(const FittedNegBinModel& model) {
  std::vector<CoefficientRow> rows;
  for (Eigen::Index j = 0; j < model.alpha.size(); ++j) {
    rows.push_back({model.column_names[static_cast<std::size_t>(j)], model.alpha(j), model.std_errors(j),
                    model.z_stats(j), model.p_values(j)});
  }
  rows.push_back({"psi", model.psi, model.psi_std_error, model.psi_z, model.psi_p_value});
  return rows;
}

std::vector<CoefficientRow> coefficient_rows(const BoostingModel& model) {
  const Eigen::VectorXd beta = original_coefficients_at(model, model.m_stop);
  std::vector<CoefficientRow> rows;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    rows.push_back({model.component_names[static_cast<std::size_t>(j)], beta(j), kNaN, kNaN, kNaN});
  }
  if (model.loss.kind == LossKind::negbin_nll) rows.push_back({"psi", model.psi(), kNaN, kNaN, kNaN});
  return rows;
}

std::string coefficient_csv(const std::vector<CoefficientRow>& rows) {
  std::ostringstream out;
  out << "term,estimate,std_error,t,p,stars\n";
  for (const auto& r : rows) {
    out << csv_quote(r.term) << ',' << csv_number(r.estimate) << ',' << csv_number(r.std_error) << ','
        << csv_number(r.statistic) << ',' << csv_number(r.p_value) << ',' << significance_stars(r.p_value) << '\n';
  }
  return out.str();
}

std::string coefficient_text(const std::vector<CoefficientRow>& rows, const std::string& title,
                             const std::vector<std::string>& footer) {
  std::size_t name_width = 8;
  for (const auto& r : rows) name_width = std::max(name_width, r.term.size());
  std::ostringstream out;
  out << title << '\n';
  out << pad("Variable", name_width, true) << pad("Estimate", 14) << pad("Std. Error", 12) << pad("t/z", 12)
      << pad("p", 10) << '\n';
  for (const auto& r : rows) {
    out << pad(r.term, name_width, true) << pad(fixed(r.estimate) + pad(significance_stars(r.p_value), 3, true), 14)
        << pad(fixed(r.std_error), 12) << pad(fixed(r.statistic, 2), 12) << pad(fixed(r.p_value, 4), 10) << '\n';
  }
  for (const auto& line : footer) out << line << '\n';
  out << "Note: *p<0.1; **p<0.05; ***p<0.01\n";
  return out.str();
}

namespace {

struct MetricLine {
  const char* name;
  std::optional<double> train;
  std::optional<double> test;
};

std::vector<MetricLine> metric_lines(const Evaluation& ev) {
  const auto& tr = ev.train;
  const EvaluationReport* te = ev.test ? &*ev.test : nullptr;
  auto test_value = [&](double EvaluationReport::*field) -> std::optional<double> {
    if (!te) return std::nullopt;
    return te->*field;
  };
  return {
      {"NLL", tr.nll, test_value(&EvaluationReport::nll)},
      {"R2", tr.r2, std::nullopt},
      {"Adj R2", tr.adj_r2, std::nullopt},
      {"AIC", tr.aic, std::nullopt},
      {"BIC", tr.bic, std::nullopt},
      {"MSEP", tr.msep, test_value(&EvaluationReport::msep)},
      {"MAE", tr.mae, test_value(&EvaluationReport::mae)},
      {"n", static_cast<double>(tr.n), te ? std::optional<double>(static_cast<double>(te->n)) : std::nullopt},
      {"k", static_cast<double>(tr.k), te ? std::optional<double>(static_cast<double>(te->k)) : std::nullopt},
  };
}

}  // namespace

std::string performance_csv(const Evaluation& ev) {
  std::ostringstream out;
  out << "metric,train,test\n";
  for (const auto& line : metric_lines(ev)) {
    out << line.name << ',' << (line.train ? format_double(*line.train) : "") << ','
        << (line.test ? format_double(*line.test) : "") << '\n';
  }
  return out.str();
}

std::string performance_text(const Evaluation& ev, const std::string& title) {
  std::ostringstream out;
  out << title << '\n' << pad("Metric", 8, true) << pad("Train", 18) << pad("Test", 18) << '\n';
  for (const auto& line : metric_lines(ev)) {
    const bool count = std::string_view(line.name) == "n" || std::string_view(line.name) == "k";
    auto show = [&](const std::optional<double>& v) { return v ? fixed(*v, count ? 0 : 3) : std::string("-"); };
    out << pad(line.name, 8, true) << pad(show(line.train), 18) << pad(show(line.test), 18) << '\n';
  }
  if (!ev.notice.empty()) out << ev.notice << '\n';
  return out.str();
}

std::string path_csv(const BoostingModel& model) {
  std::ostringstream out;
  out << "m,component,coefficient_increment,train_risk\n";
  for (std::size_t m = 0; m < model.selections.size(); ++m) {
    out << (m + 1) << ',' << csv_quote(model.component_names[static_cast<std::size_t>(model.selections[m])]) << ','
        << format_double(model.increments[m]) << ',' << format_double(model.train_risk[m + 1]) << '\n';
  }
  return out.str();
}

std::string selection_csv(const BoostingModel& model) {
  std::ostringstream out;
  out << "component,count,probability\n";
  for (const auto& s : selection_probabilities(model)) {
    out << csv_quote(s.name) << ',' << s.count << ',' << format_double(s.probability) << '\n';
  }
  return out.str();
}

std::string selection_text(const BoostingModel& model, std::size_t top) {
  const auto shares = selection_probabilities(model);
  std::ostringstream out;
  out << "Most important variables after m_stop = " << model.m_stop << " (selection probabilities in brackets)\n";
  for (std::size_t i = 0; i < shares.size() && i < top; ++i) {
    out << shares[i].name << " (" << fixed(shares[i].probability) << ")\n";
  }
  out << "Distinct variables selected: " << shares.size() << '\n';
  return out.str();
}

std::string cv_curves_csv(const CvResult& cv) {
  std::ostringstream out;
  out << "fold,m,oob_risk\n";
  for (std::size_t f = 0; f < cv.oob_curves.size(); ++f) {
    for (std::size_t m = 0; m < cv.oob_curves[f].size(); ++m) {
      out << f << ',' << m << ',' << format_double(cv.oob_curves[f][m]) << '\n';
    }
  }
  return out.str();
}

}  // namespace citepred
