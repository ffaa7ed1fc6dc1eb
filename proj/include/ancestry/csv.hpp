#pragma once

#include <iosfwd>
#include <string>

#include "ancestry/timeseries.hpp"

namespace ancestry {

// Reads a rectangular CSV with a header row of series names and a numeric
// body. No imputation: empty or non-finite cells raise MissingDataError with
// the offending location, malformed cells raise ParseError.
TimeSeries ingest_csv(const std::string& path);
TimeSeries ingest_csv_stream(std::istream& in, const std::string& origin);

// Writes values with 17 significant digits so a read-back reproduces the
// matrix bit-exactly.
void write_csv(const TimeSeries& x, std::ostream& out);
void write_csv(const TimeSeries& x, const std::string& path);

// Realigns one column to the following row (dropping the final row), e.g. to
// turn "waiting before the eruption" into "waiting after the eruption".
TimeSeries shift_column(const TimeSeries& x, const std::string& column);

}  // namespace ancestry
