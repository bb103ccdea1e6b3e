#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wtseq::csv {

/// Reads one logical record (RFC 4180 quoting, embedded newlines allowed).
/// Returns nullopt at end of input. `line` is advanced by physical lines read.
std::optional<std::vector<std::string>> read_record(std::istream& in, std::size_t& line);

std::string escape(std::string_view field);

/// Writes fields joined by ',' and terminated by '\n'.
void write_record(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trippable form for finite values; "" for NaN/missing.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace wtseq::csv
