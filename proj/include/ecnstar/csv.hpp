#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "ecnstar/mark_model.hpp"

namespace ecnstar {

/// Histogram CSV: header `mark_count,packets`, one row per count, ascending.
/// Parse errors carry the offending line number.
MarkDistribution read_histogram_csv(std::istream& in);
MarkDistribution read_histogram_file(const std::filesystem::path& file);

void write_histogram_csv(const MarkDistribution& dist, std::ostream& out);

} // namespace ecnstar
