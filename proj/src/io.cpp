#include "somp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace somp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field_double(const std::string& s, int lineno, const char* field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad value for field '" + field +
                         "': '" + s + "'");
    }
}

long parse_field_long(const std::string& s, int lineno, const char* field) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("line " + std::to_string(lineno) + ": bad value for field '" + field +
                         "': '" + s + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string csv_metadata(const std::string& config_digest, const std::string& seeds) {
    std::ostringstream os;
    os << "# somp v0.1.0\n";
    os << "# config_hash=" << config_digest << "\n";
    os << "# seeds=" << seeds << "\n";
    return os.str();
}

SampleFile read_sample_file(std::istream& in) {
    std::string line;
    int lineno = 0;
    // skip comment block
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '#') break;
    }
    if (line.empty() && !in) throw ParseError("empty sample file");
    if (split_csv_line(line) != std::vector<std::string>{"ell", "re", "im", "observed"})
        throw ParseError("line " + std::to_string(lineno) +
                         ": expected header 'ell,re,im,observed'");

    struct Row {
        long ell;
        double re, im;
        int obs;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = split_csv_line(line);
        if (f.size() != 4)
            throw ParseError("line " + std::to_string(lineno) + ": expected 4 fields, got " +
                             std::to_string(f.size()));
        Row r;
        r.ell = parse_field_long(f[0], lineno, "ell");
        r.re = parse_field_double(f[1], lineno, "re");
        r.im = parse_field_double(f[2], lineno, "im");
        long obs = parse_field_long(f[3], lineno, "observed");
        if (obs != 0 && obs != 1)
            throw ParseError("line " + std::to_string(lineno) + ": field 'observed' must be 0 or 1");
        r.obs = static_cast<int>(obs);
        rows.push_back(r);
    }
    if (rows.empty()) throw ParseError("sample file has no data rows");
    if (rows.size() % 2 == 0) throw ParseError("sample file must have an odd number of rows (2n+1)");
    const int n = static_cast<int>(rows.size() / 2);
    SampleFile sf;
    sf.samples.n = n;
    sf.samples.values.assign(rows.size(), cd{});
    sf.mask.n = n;
    sf.mask.observed.assign(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const long expect = static_cast<long>(i) - n;
        if (rows[i].ell != expect)
            throw ParseError("field 'ell' must be contiguous over [-n, n]; expected " +
                             std::to_string(expect) + ", got " + std::to_string(rows[i].ell));
        sf.samples.values[i] = cd{rows[i].re, rows[i].im};
        sf.mask.observed[i] = static_cast<std::uint8_t>(rows[i].obs);
    }
    int observed = 0;
    for (int l = 1; l <= n; ++l) {
        if (sf.mask.observed[static_cast<std::size_t>(n + l)] !=
            sf.mask.observed[static_cast<std::size_t>(n - l)])
            throw ParseError("observation pattern violates symmetry at ell=" + std::to_string(l) +
                             ": observed[ell] must equal observed[-ell]");
    }
    observed = sf.mask.count();
    sf.mask.p = double(observed) / double(2 * n + 1);
    if (observed == 0) throw ParseError("sample file has no observed entries");
    return sf;
}

SampleFile read_sample_file_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open sample file: " + path);
    return read_sample_file(in);
}

void write_sample_file(std::ostream& out, const SampleVector& y, const ObservationMask& mask,
                       const std::string& meta) {
    y.validate();
    mask.validate();
    if (y.n != mask.n) throw DimensionError("sample/mask half-bandwidth mismatch");
    out << meta;
    out << "ell,re,im,observed\n";
    for (int l = -y.n; l <= y.n; ++l) {
        const std::size_t i = static_cast<std::size_t>(l + y.n);
        const bool obs = mask.observed[i] != 0;
        const cd v = obs ? y.values[i] : cd{0.0, 0.0};
        out << l << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << ','
            << (obs ? 1 : 0) << '\n';
    }
}

void write_sample_file_path(const std::string& path, const SampleVector& y,
                            const ObservationMask& mask, const std::string& meta) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    write_sample_file(out, y, mask, meta);
}

}  // namespace somp
