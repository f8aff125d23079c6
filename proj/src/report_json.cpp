#include "lipcert/report_json.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace lipcert {

std::string norm_spec_string(const NormSpec& spec)
{
    char buf[40];
    std::string out;
    if (spec.p == NormSpec::inf) {
        out = "inf";
    } else {
        std::snprintf(buf, sizeof(buf), "%.17g", spec.p);
        out = buf;
    }
    if (!spec.weights.empty()) {
        out += ':';
        for (std::size_t k = 0; k < spec.weights.size(); ++k) {
            if (k)
                out += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", spec.weights[k]);
            out += buf;
        }
    }
    return out;
}

NormSpec parse_norm_spec(const std::string& text)
{
    NormSpec spec;
    std::string head = text;
    const std::size_t colon = text.find(':');
    if (colon != std::string::npos) {
        head = text.substr(0, colon);
        std::stringstream ss(text.substr(colon + 1));
        std::string field;
        while (std::getline(ss, field, ','))
            spec.weights.push_back(std::stod(field));
    }
    if (head == "inf" || head == "Inf" || head == "INF")
        spec.p = NormSpec::inf;
    else
        spec.p = std::stod(head);
    spec.validate();
    return spec;
}

std::string report_to_json(const CertificateReport& report)
{
    using json = nlohmann::ordered_json;
    const auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json doc;
    doc["product_bound"] = report.product_bound;
    doc["linear_lower"] = report.linear_lower;
    doc["theta"] = report.theta;
    doc["vartheta"] = opt(report.vartheta);
    doc["vartheta_exact"] = report.vartheta_exact;
    doc["vartheta_sample_lower"] = opt(report.vartheta_sample_lower);
    doc["positive_collapse"] = opt(report.positive_collapse);
    doc["absolute_bound"] = opt(report.absolute_bound);
    doc["certified"] = opt(report.certified);
    doc["norm_in"] = norm_spec_string(report.norm_in);
    doc["norm_out"] = norm_spec_string(report.norm_out);
    doc["budget"] = report.budget;
    doc["seed"] = report.seed;
    doc["elapsed_ms"] = 0.0;
    return doc.dump(2);
}

} // namespace lipcert
