#include "output.h"

#include <iomanip>
#include <sstream>

namespace sitrep::cli {

namespace {

std::string Num(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string Probabilities(const nlohmann::json& p) {
  std::ostringstream s;
  s << "[" << std::fixed << std::setprecision(3) << p[0].get<double>() << " "
    << p[1].get<double>() << " " << p[2].get<double>() << "]";
  return s.str();
}

void PrintPrediction(const char* label, const nlohmann::json& p, std::ostream& out) {
  out << label << p["class"].get<std::string>() << "  p(Low,Medium,High)="
      << Probabilities(p["probabilities"]) << '\n';
}

void PrintSimulate(const nlohmann::json& b, std::ostream& out) {
  out << "county " << b["fips"].get<std::string>() << "  event "
      << b["event"].get<std::string>() << "  " << b["dag"].get<std::string>() << '\n';
  PrintPrediction("factual:        ", b["factual_prediction"], out);
  PrintPrediction("counterfactual: ", b["prediction"], out);
  out << "changed nodes:\n";
  int shown = 0;
  for (const auto& n : b["nodes"]) {
    const double before = n["factual"].get<double>();
    const double after = n["value"].get<double>();
    if (before == after && !n["intervened"].get<bool>()) continue;
    out << "  " << std::left << std::setw(40) << n["name"].get<std::string>() << std::right
        << std::setw(14) << Num(before, 6) << " -> " << std::setw(14) << Num(after, 6);
    if (n["intervened"].get<bool>()) out << "  (do)";
    if (n["clamped"].get<bool>()) out << "  (clamped)";
    out << '\n';
    ++shown;
  }
  if (shown == 0) out << "  none\n";
}

void PrintAttribution(const nlohmann::json& b, std::ostream& out) {
  out << b["level"].get<std::string>() << " necessity for " << b["record_id"].get<std::string>()
      << " (" << b["model_id"].get<std::string>() << ", n=" << b["n"].get<int>()
      << ", seed=" << b["seed"].get<std::uint64_t>() << ")\n";
  for (const auto& s : b["scores"]) {
    out << "  " << std::left << std::setw(40) << s["unit"].get<std::string>() << std::right
        << std::fixed << std::setprecision(4) << s["alpha"].get<double>() << '\n'
        << std::defaultfloat;
  }
}

void PrintRecourse(const nlohmann::json& b, std::ostream& out) {
  out << "status: " << b["status"].get<std::string>() << "  current "
      << b["current_class"].get<std::string>() << " -> desired "
      << b["desired"].get<std::string>() << "  (k=" << b["max_features"].get<int>()
      << ", seed=" << b["seed"].get<std::uint64_t>() << ")\n";
  int i = 0;
  for (const auto& s : b["suggestions"]) {
    out << "suggestion " << ++i << ": " << s["resulting_class"].get<std::string>()
        << "  distance " << Num(s["distance"].get<double>()) << '\n';
    for (const auto& c : s["changes"]) {
      out << "  " << std::left << std::setw(40) << c["feature"].get<std::string>()
          << std::right << std::setw(14) << Num(c["from"].get<double>(), 6) << " -> "
          << std::setw(14) << Num(c["to"].get<double>(), 6) << '\n';
    }
  }
  if (b["status"] == "no_recourse_found") out << "no recourse found\n";
}

void PrintEval(const nlohmann::json& b, std::ostream& out) {
  out << b["dag"].get<std::string>() << " " << b["folds"].get<int>()
      << "-fold macro-F1: " << Num(b["mean_macro_f1"].get<double>()) << '\n';
  int fold = 0;
  for (const auto& f : b["fold_macro_f1"]) {
    out << "  fold " << ++fold << ": " << Num(f.get<double>()) << '\n';
  }
}

void PrintPredict(const nlohmann::json& b, std::ostream& out) {
  for (const auto& c : b["counties"]) {
    out << c["fips"].get<std::string>() << "  " << std::left << std::setw(8)
        << c["predicted_class"].get<std::string>() << std::right << "  "
        << c["name"].get<std::string>() << '\n';
  }
}

void PrintValidate(const nlohmann::json& b, std::ostream& out) {
  int i = 0;
  for (const auto& v : b["verdicts"]) {
    out << "suggestion " << ++i << ": " << (v["ok"].get<bool>() ? "ok" : "FAILED") << '\n';
    for (const auto& f : v["failures"]) out << "  " << f.get<std::string>() << '\n';
  }
  out << (b["all_ok"].get<bool>() ? "all suggestions valid" : "invalid suggestions found")
      << '\n';
}

void PrintSummary(const nlohmann::json& b, std::ostream& out) {
  for (const auto& [key, value] : b.items()) {
    if (value.is_object() || (value.is_array() && value.size() > 8)) continue;
    out << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
        << '\n';
  }
  if (b.contains("class_counts")) out << "class_counts: " << b["class_counts"].dump() << '\n';
}

}  // namespace

void PrintJson(const CommandOutput& output, std::ostream& out) {
  out << output.body.dump(2) << '\n';
}

void PrintHuman(const CommandOutput& output, std::ostream& out) {
  const auto& b = output.body;
  if (output.kind == "simulate") {
    PrintSimulate(b, out);
  } else if (output.kind == "attribute") {
    PrintAttribution(b, out);
  } else if (output.kind == "recourse") {
    PrintRecourse(b, out);
  } else if (output.kind == "eval") {
    PrintEval(b, out);
  } else if (output.kind == "predict") {
    PrintPredict(b, out);
  } else if (output.kind == "validate") {
    PrintValidate(b, out);
  } else {
    PrintSummary(b, out);
  }
}

}  // namespace sitrep::cli
