#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "afdm/harness.hpp"

namespace afdm {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::CSV;
  if (s == "json") return ReportFormat::JSON;
  if (s == "plotdata") return ReportFormat::PlotData;
  throw Error("unknown report format '" + s + "'");
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  os << "config_hash,N,L,Q,p_d,p_D,N_p,snr_db,mse,support_rate,overhead,f_s_hz,seed,"
        "mse_stderr,mean_iterations,failures,trials,P\n";
  for (const auto& r : records) {
    os << r.config_hash << ',' << r.N << ',' << r.L << ',' << r.Q << ',' << num(r.p_d) << ',' << num(r.p_D) << ','
       << r.N_p << ',' << num(r.snr_db) << ',' << num(r.mse) << ',' << num(r.support_rate) << ',' << r.overhead
       << ',' << num(r.f_s_hz) << ',' << r.seed << ',' << num(r.mse_stderr) << ',' << num(r.mean_iterations)
       << ',' << r.failures << ',' << r.trials << ',' << r.P << '\n';
  }
  return os.str();
}

namespace {

// JSON has no inf/nan; they travel as strings.
nlohmann::json jnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_jnum(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error("records_from_json: bad number '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

std::string records_to_json(const std::vector<ResultRecord>& records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"config_hash", r.config_hash},
                   {"N", r.N},
                   {"L", r.L},
                   {"Q", r.Q},
                   {"p_d", jnum(r.p_d)},
                   {"p_D", jnum(r.p_D)},
                   {"N_p", r.N_p},
                   {"snr_db", jnum(r.snr_db)},
                   {"mse", jnum(r.mse)},
                   {"support_rate", jnum(r.support_rate)},
                   {"overhead", r.overhead},
                   {"f_s_hz", jnum(r.f_s_hz)},
                   {"seed", r.seed},
                   {"mse_stderr", jnum(r.mse_stderr)},
                   {"mean_iterations", jnum(r.mean_iterations)},
                   {"failures", r.failures},
                   {"trials", r.trials},
                   {"P", r.P},
                   {"wall_time_s", jnum(r.wall_time_s)}});
  }
  return arr.dump(2);
}

std::vector<ResultRecord> records_from_json(const std::string& text) {
  std::vector<ResultRecord> out;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      ResultRecord r;
      r.config_hash = j.at("config_hash").get<std::string>();
      r.N = j.at("N");
      r.L = j.at("L");
      r.Q = j.at("Q");
      r.p_d = from_jnum(j.at("p_d"));
      r.p_D = from_jnum(j.at("p_D"));
      r.N_p = j.at("N_p");
      r.snr_db = from_jnum(j.at("snr_db"));
      r.mse = from_jnum(j.at("mse"));
      r.support_rate = from_jnum(j.at("support_rate"));
      r.overhead = j.at("overhead");
      r.f_s_hz = from_jnum(j.at("f_s_hz"));
      r.seed = j.at("seed");
      r.mse_stderr = from_jnum(j.at("mse_stderr"));
      r.mean_iterations = from_jnum(j.at("mean_iterations"));
      r.failures = j.at("failures");
      r.trials = j.at("trials");
      r.P = j.at("P");
      r.wall_time_s = from_jnum(j.at("wall_time_s"));
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("records_from_json: ") + e.what());
  }
  return out;
}

std::string records_to_plotdata(const std::vector<ResultRecord>& records) {
  // first-appearance order of the series
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ResultRecord*>> series;
  for (const auto& r : records) {
    if (!series.count(r.config_hash)) order.push_back(r.config_hash);
    series[r.config_hash].push_back(&r);
  }
  std::ostringstream os;
  for (const auto& hash : order) {
    const ResultRecord& head = *series[hash].front();
    os << "# series " << hash << " N=" << head.N << " L=" << head.L << " Q=" << head.Q << " p_d=" << num(head.p_d)
       << " p_D=" << num(head.p_D) << " N_p=" << head.N_p << " overhead=" << head.overhead << "\n";
    os << "# snr_db mse\n";
    for (const ResultRecord* r : series[hash]) os << num(r->snr_db) << ' ' << num(r->mse) << "\n";
    os << "\n";
  }
  return os.str();
}

void emit_report(const std::vector<ResultRecord>& records, ReportFormat format, const std::string& path) {
  if (records.empty()) throw Error("emit_report: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_report: cannot write '" + path + "'");
  switch (format) {
    case ReportFormat::CSV: out << records_to_csv(records); break;
    case ReportFormat::JSON: out << records_to_json(records); break;
    case ReportFormat::PlotData: out << records_to_plotdata(records); break;
  }
  if (!out) throw Error("emit_report: write failed for '" + path + "'");
}

}  // namespace afdm
