#pragma once

#include <string>

#include "lipcert/certificates.hpp"

namespace lipcert {

// "2", "inf", "1:0.5,2", ...
std::string norm_spec_string(const NormSpec& spec);
NormSpec parse_norm_spec(const std::string& text);

// Fixed field order, shortest round-trip doubles. elapsed_ms is emitted as 0
// so that seeded runs stay byte-identical; wall-clock timings belong to the
// human-readable output.
std::string report_to_json(const CertificateReport& report);

} // namespace lipcert
