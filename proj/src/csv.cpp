#include "ecnstar/csv.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "ecnstar/errors.hpp"

namespace ecnstar {

namespace {

std::uint64_t parse_u64(const std::string& field, std::size_t line, const char* what) {
    std::uint64_t v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(std::string("invalid ") + what + " \"" + field + "\"", line);
    return v;
}

} // namespace

MarkDistribution read_histogram_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError("empty histogram file", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "mark_count,packets")
        throw ParseError("expected header \"mark_count,packets\", got \"" + line + "\"", lineno);

    std::vector<std::uint64_t> counts;
    long last_k = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected \"mark_count,packets\" row", lineno);
        if (line.find(',', comma + 1) != std::string::npos)
            throw ParseError("too many fields", lineno);
        const std::uint64_t k = parse_u64(line.substr(0, comma), lineno, "mark count");
        const std::uint64_t c = parse_u64(line.substr(comma + 1), lineno, "packet count");
        if (static_cast<long>(k) <= last_k)
            throw ParseError("mark counts must be strictly ascending", lineno);
        last_k = static_cast<long>(k);
        counts.resize(k + 1, 0);
        counts[k] = c;
    }
    if (counts.empty()) throw ParseError("histogram has no data rows", lineno + 1);
    return MarkDistribution::from_counts(std::move(counts));
}

MarkDistribution read_histogram_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open histogram file " + file.string());
    return read_histogram_csv(in);
}

void write_histogram_csv(const MarkDistribution& dist, std::ostream& out) {
    out << "mark_count,packets\n";
    for (std::size_t k = 0; k < dist.counts.size(); ++k) out << k << ',' << dist.counts[k] << '\n';
}

} // namespace ecnstar
