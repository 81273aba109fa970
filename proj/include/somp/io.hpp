#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "somp/signal.hpp"

namespace somp {

/// Samples plus their observation pattern as read from disk.
struct SampleFile {
    SampleVector samples;
    ObservationMask mask;
};

/// CSV schema: header "ell,re,im,observed", ell contiguous over [-n, n],
/// observed in {0,1} and symmetric. Unobserved rows carry zero samples.
SampleFile read_sample_file(std::istream& in);
SampleFile read_sample_file_path(const std::string& path);
void write_sample_file(std::ostream& out, const SampleVector& y, const ObservationMask& mask,
                       const std::string& meta);
void write_sample_file_path(const std::string& path, const SampleVector& y,
                            const ObservationMask& mask, const std::string& meta);

/// Leading comment block stamped on every emitted CSV: config hash, seed(s)
/// and version, so runs stay attributable.
std::string csv_metadata(const std::string& config_digest, const std::string& seeds);

/// FNV-1a over the canonical config text.
std::uint64_t fnv1a(const std::string& text);

std::string format_double(double v);

}  // namespace somp
