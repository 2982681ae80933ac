#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "demandirl/model.hpp"

namespace demandirl {

/// Writes a corpus in the exchange schema
///
///   user_id,cycle_id,day,a,q,d
///
/// one row per day, day running 0..cycle_days-1, floats with 17
/// significant digits so a written corpus re-reads bit-exactly.  Path i
/// is emitted as user 0, cycle i (a corpus is one customer's history).
void write_corpus_csv(std::ostream& out,
                      const std::vector<ConsumptionPath>& corpus);
/// Same, to a file.  Throws DataError when the file cannot be opened.
void write_corpus_csv(const std::string& path,
                      const std::vector<ConsumptionPath>& corpus);

/// Reads the schema above: rows are regrouped by (user_id, cycle_id),
/// sorted by day, and every cycle's bookkeeping is checked (days
/// consecutive from 0, d counting down to 1, quota following
/// (q - a)_+).  The plan attached to each path takes its quota from the
/// cycle's first day and its length from the row count; price and fee
/// are not representable in the schema, so the caller supplies them.
/// An empty file (or a lone header) yields an empty corpus.  Violations
/// raise DataError naming the file and 1-based line number.
std::vector<ConsumptionPath> ingest_csv(std::istream& in, double price,
                                        double fee,
                                        const std::string& name = "<stream>");
std::vector<ConsumptionPath> ingest_csv(const std::string& path, double price,
                                        double fee);

/// Reads a plan menu with header `fee,quota,price,cycle_days`; price
/// accepts "inf" for no-overage plans.  Throws DataError with line
/// numbers on malformed rows; an empty file yields an empty menu.
std::vector<PlanSpec> read_plans_csv(std::istream& in,
                                     const std::string& name = "<stream>");
std::vector<PlanSpec> read_plans_csv(const std::string& path);

/// Formats one double with 17 significant digits ("%.17g"), the
/// round-trip-exact form used across every CSV this tool writes;
/// infinities print as "inf"/"-inf".
std::string format_double(double x);

}  // namespace demandirl
