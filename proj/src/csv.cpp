#include "demandirl/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "demandirl/errors.hpp"

namespace demandirl {

namespace {

const char kCorpusHeader[] = "user_id,cycle_id,day,a,q,d";
const char kPlansHeader[] = "fee,quota,price,cycle_days";

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void row_error(const std::string& name, std::size_t line_no,
                            const std::string& what) {
  throw DataError(name + " line " + std::to_string(line_no) + ": " + what);
}

long long parse_int(const std::string& s, const std::string& name,
                    std::size_t line_no, const char* field) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    row_error(name, line_no,
              std::string(field) + " must be an integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& name,
                    std::size_t line_no, const char* field) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    row_error(name, line_no,
              std::string(field) + " must be a number, got '" + s + "'");
  }
  return v;
}

struct CsvRow {
  std::size_t line_no;
  int day;
  double a;
  double q;
  int d;
};

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_corpus_csv(std::ostream& out,
                      const std::vector<ConsumptionPath>& corpus) {
  out << kCorpusHeader << "\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const ConsumptionPath& path = corpus[i];
    for (std::size_t t = 0; t < path.steps.size(); ++t) {
      const ConsumptionStep& s = path.steps[t];
      out << "0," << i << "," << t << "," << format_double(s.a) << ","
          << format_double(s.q) << "," << s.d << "\n";
    }
  }
}

void write_corpus_csv(const std::string& path,
                      const std::vector<ConsumptionPath>& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_corpus_csv(out, corpus);
  out.flush();
  if (!out) throw DataError("failed while writing '" + path + "'");
}

std::vector<ConsumptionPath> ingest_csv(std::istream& in, double price,
                                        double fee, const std::string& name) {
  if (!(price >= 0.0)) {  // +inf allowed
    throw std::invalid_argument("price must be >= 0 or infinite");
  }
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return {};  // empty file: empty corpus
  ++line_no;
  if (trim(line) != kCorpusHeader) {
    row_error(name, line_no,
              std::string("expected header '") + kCorpusHeader + "'");
  }

  // (user_id, cycle_id) -> rows; std::map keeps group order deterministic.
  std::map<std::pair<long long, long long>, std::vector<CsvRow>> groups;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 6) {
      row_error(name, line_no,
                "expected 6 comma-separated fields, got " +
                    std::to_string(f.size()));
    }
    CsvRow row;
    row.line_no = line_no;
    long long user = parse_int(f[0], name, line_no, "user_id");
    long long cycle = parse_int(f[1], name, line_no, "cycle_id");
    long long day = parse_int(f[2], name, line_no, "day");
    row.a = parse_double(f[3], name, line_no, "a");
    row.q = parse_double(f[4], name, line_no, "q");
    long long d = parse_int(f[5], name, line_no, "d");
    if (day < 0 || day > 1000000) row_error(name, line_no, "day out of range");
    if (d < -1000000 || d > 1000000) row_error(name, line_no, "d out of range");
    row.day = static_cast<int>(day);
    row.d = static_cast<int>(d);
    if (!std::isfinite(row.a) || row.a < 0.0) {
      row_error(name, line_no, "consumption a must be finite and >= 0");
    }
    if (!std::isfinite(row.q) || row.q < 0.0) {
      row_error(name, line_no, "quota remaining q must be finite and >= 0");
    }
    groups[{user, cycle}].push_back(row);
  }

  std::vector<ConsumptionPath> corpus;
  corpus.reserve(groups.size());
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CsvRow& a, const CsvRow& b) {
                       return a.day < b.day;
                     });
    int t_days = static_cast<int>(rows.size());
    ConsumptionPath path;
    path.plan.fee = fee;
    path.plan.price = price;
    path.plan.quota = rows.front().q;
    path.plan.cycle_days = t_days;
    path.steps.reserve(rows.size());
    for (int t = 0; t < t_days; ++t) {
      const CsvRow& row = rows[static_cast<std::size_t>(t)];
      if (row.day != t) {
        row_error(name, row.line_no,
                  "user " + std::to_string(key.first) + " cycle " +
                      std::to_string(key.second) + " has duplicate or "
                      "missing days (expected day " + std::to_string(t) +
                      ", found " + std::to_string(row.day) + ")");
      }
      if (row.d != t_days - t) {
        row_error(name, row.line_no,
                  "days remaining d=" + std::to_string(row.d) +
                      " does not count down from the cycle length (expected " +
                      std::to_string(t_days - t) + ")");
      }
      if (t > 0) {
        const CsvRow& prev = rows[static_cast<std::size_t>(t) - 1];
        double expect = std::max(prev.q - prev.a, 0.0);
        double tol = 1e-9 * std::max(1.0, prev.q);
        if (std::fabs(row.q - expect) > tol) {
          row_error(name, row.line_no,
                    "quota remaining does not follow (q - a)_+ from the "
                    "previous day (expected " + format_double(expect) +
                        ", got " + format_double(row.q) + ")");
        }
      }
      path.steps.push_back({row.a, row.q, row.d});
    }
    validate_path(path);  // belt-and-braces; the checks above mirror it
    corpus.push_back(std::move(path));
  }
  return corpus;
}

std::vector<ConsumptionPath> ingest_csv(const std::string& path, double price,
                                        double fee) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return ingest_csv(in, price, fee, path);
}

std::vector<PlanSpec> read_plans_csv(std::istream& in,
                                     const std::string& name) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return {};
  ++line_no;
  if (trim(line) != kPlansHeader) {
    row_error(name, line_no,
              std::string("expected header '") + kPlansHeader + "'");
  }
  std::vector<PlanSpec> plans;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 4) {
      row_error(name, line_no,
                "expected 4 comma-separated fields, got " +
                    std::to_string(f.size()));
    }
    PlanSpec plan;
    plan.fee = parse_double(f[0], name, line_no, "fee");
    plan.quota = parse_double(f[1], name, line_no, "quota");
    plan.price = parse_double(f[2], name, line_no, "price");
    long long cd = parse_int(f[3], name, line_no, "cycle_days");
    if (cd < 1 || cd > 1000000) {
      row_error(name, line_no, "cycle_days out of range");
    }
    plan.cycle_days = static_cast<int>(cd);
    try {
      plan.validate();
    } catch (const std::invalid_argument& e) {
      row_error(name, line_no, e.what());
    }
    plans.push_back(plan);
  }
  return plans;
}

std::vector<PlanSpec> read_plans_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return read_plans_csv(in, path);
}

}  // namespace demandirl
