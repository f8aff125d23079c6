#include "lipcert/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lipcert {

namespace {

std::string trim(const std::string& s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(int line, const std::string& message)
{
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": " + message);
}

double parse_decimal(const std::string& token, int line)
{
    const std::string t = trim(token);
    if (t.empty())
        parse_fail(line, "empty numeric field");
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &consumed);
    } catch (const std::exception&) {
        parse_fail(line, "not a number: '" + t + "'");
    }
    if (consumed != t.size())
        parse_fail(line, "trailing characters after number: '" + t + "'");
    return value;
}

std::vector<double> parse_csv(const std::string& text, int line)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ','))
        values.push_back(parse_decimal(field, line));
    if (values.empty())
        parse_fail(line, "expected comma-separated decimals");
    return values;
}

std::string format_decimal(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ActivationSpec {
    std::string name;
    std::map<std::string, double> scalar_params;
    std::vector<double> tau;
    bool has_tau = false;
    std::string set_name;
};

ActivationSpec parse_activation_text(const std::string& text, int line)
{
    ActivationSpec spec;
    const std::size_t open = text.find('(');
    if (open == std::string::npos) {
        spec.name = trim(text);
        return spec;
    }
    if (text.back() != ')')
        parse_fail(line, "unbalanced parentheses in activation spec");
    spec.name = trim(text.substr(0, open));
    const std::string inner = text.substr(open + 1, text.size() - open - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            parse_fail(line, "activation parameter must be key=value: '" + item + "'");
        const std::string key = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        if (key == "set") {
            spec.set_name = value;
        } else if (key == "tau") {
            spec.has_tau = true;
            std::stringstream ts(value);
            std::string comp;
            while (std::getline(ts, comp, ';'))
                spec.tau.push_back(parse_decimal(comp, line));
        } else {
            spec.scalar_params[key] = parse_decimal(value, line);
        }
    }
    if (spec.name.empty())
        parse_fail(line, "missing activation name");
    return spec;
}

VectorActivation build_activation(const ActivationSpec& spec, int dimension, int line)
{
    std::string name = spec.name;
    const std::string separable_prefix = "separable:";
    if (name.rfind(separable_prefix, 0) == 0)
        name = name.substr(separable_prefix.size());

    if (name == "sort_mix") {
        double omega = 1.0;
        auto it = spec.scalar_params.find("omega");
        if (it != spec.scalar_params.end())
            omega = it->second;
        for (const auto& [key, value] : spec.scalar_params) {
            (void)value;
            if (key != "omega")
                parse_fail(line, "sort_mix does not take parameter '" + key + "'");
        }
        ProjectionSet set = ProjectionSet::mean_subspace;
        if (!spec.set_name.empty()) {
            if (spec.set_name == "mean")
                set = ProjectionSet::mean_subspace;
            else if (spec.set_name == "box01")
                set = ProjectionSet::unit_box;
            else
                parse_fail(line, "unknown sort_mix set '" + spec.set_name +
                                     "' (supported: mean, box01)");
        }
        return VectorActivation::make_sort_mix(dimension, omega, set);
    }
    if (name == "median") {
        double theta = 0.0;
        for (const auto& [key, value] : spec.scalar_params) {
            if (key == "theta")
                theta = value;
            else
                parse_fail(line, "median does not take parameter '" + key + "'");
        }
        std::vector<double> tau = spec.has_tau
                                      ? spec.tau
                                      : std::vector<double>(static_cast<std::size_t>(dimension),
                                                            0.5);
        if (static_cast<int>(tau.size()) != dimension)
            parse_fail(line, "median tau length " + std::to_string(tau.size()) +
                                 " does not match layer dimension " + std::to_string(dimension));
        return VectorActivation::make_median(std::move(tau), theta);
    }
    if (name == "squashing") {
        double mu = squashing_mu_max();
        for (const auto& [key, value] : spec.scalar_params) {
            if (key == "mu")
                mu = value;
            else
                parse_fail(line, "squashing does not take parameter '" + key + "'");
        }
        return VectorActivation::make_squashing(dimension, mu);
    }

    try {
        return VectorActivation::make_separable(builtin(name, spec.scalar_params), dimension);
    } catch (const Error& e) {
        parse_fail(line, e.what());
    }
}

std::string activation_text(const VectorActivation& act)
{
    std::string out;
    switch (act.kind) {
    case VectorKind::separable: {
        const ScalarActivation& first = act.components.front();
        for (const ScalarActivation& c : act.components)
            if (c.name != first.name || c.params != first.params)
                fail(ErrorKind::invalid_input,
                     "cannot serialize a separable layer with non-uniform components");
        out = first.name;
        if (!first.params.empty()) {
            out += '(';
            bool sep = false;
            for (const auto& [key, value] : first.params) {
                if (sep)
                    out += ',';
                out += key + "=" + format_decimal(value);
                sep = true;
            }
            out += ')';
        }
        return out;
    }
    case VectorKind::sort_mix:
        out = "sort_mix(omega=" + format_decimal(act.omega) + ",set=";
        out += act.set == ProjectionSet::mean_subspace ? "mean" : "box01";
        out += ')';
        return out;
    case VectorKind::median: {
        out = "median(tau=";
        for (std::size_t k = 0; k < act.tau.size(); ++k) {
            if (k)
                out += ';';
            out += format_decimal(act.tau[k]);
        }
        out += ",theta=" + format_decimal(act.offset) + ')';
        return out;
    }
    case VectorKind::squashing:
        return "squashing(mu=" + format_decimal(act.mu) + ')';
    }
    fail(ErrorKind::internal, "unhandled activation kind");
}

} // namespace

std::vector<double> Network::hidden_alphas() const
{
    std::vector<double> alphas;
    for (int i = 0; i + 1 < depth(); ++i)
        alphas.push_back(layers[static_cast<std::size_t>(i)].activation.alpha);
    return alphas;
}

bool Network::hidden_separable() const
{
    for (int i = 0; i + 1 < depth(); ++i)
        if (!layers[static_cast<std::size_t>(i)].activation.separable)
            return false;
    return true;
}

bool Network::all_separable() const
{
    return hidden_separable() && layers.back().activation.separable;
}

void Network::validate() const
{
    if (input_dim < 1)
        fail(ErrorKind::shape, "network input dimension must be positive");
    if (layers.empty())
        fail(ErrorKind::shape, "network needs at least one layer");
    int prev = input_dim;
    for (int i = 0; i < depth(); ++i) {
        const Layer& layer = layers[static_cast<std::size_t>(i)];
        if (layer.weight.cols != prev)
            fail(ErrorKind::shape, "layer " + std::to_string(i + 1) + " expects input dimension " +
                                       std::to_string(layer.weight.cols) + " but receives " +
                                       std::to_string(prev));
        if (static_cast<int>(layer.bias.size()) != layer.weight.rows)
            fail(ErrorKind::shape, "layer " + std::to_string(i + 1) + " bias length mismatch");
        if (layer.activation.dimension != layer.weight.rows)
            fail(ErrorKind::shape,
                 "layer " + std::to_string(i + 1) + " activation dimension mismatch");
        if (!(layer.activation.alpha >= 0.0 && layer.activation.alpha <= 1.0))
            fail(ErrorKind::invalid_input,
                 "layer " + std::to_string(i + 1) + " alpha outside [0, 1]");
        layer.weight.require_finite();
        for (double b : layer.bias)
            if (!std::isfinite(b))
                fail(ErrorKind::invalid_input,
                     "layer " + std::to_string(i + 1) + " has non-finite bias");
        prev = layer.weight.rows;
    }
}

std::vector<double> forward(const Network& net, const std::vector<double>& x)
{
    if (static_cast<int>(x.size()) != net.input_dim)
        fail(ErrorKind::shape, "forward input has dimension " + std::to_string(x.size()) +
                                   ", network expects " + std::to_string(net.input_dim));
    std::vector<double> y = x, z;
    for (const Layer& layer : net.layers) {
        const Matrix& w = layer.weight;
        z.assign(static_cast<std::size_t>(w.rows), 0.0);
        for (int r = 0; r < w.rows; ++r) {
            double acc = layer.bias[static_cast<std::size_t>(r)];
            const double* row = w.a.data() + static_cast<std::size_t>(r) * w.cols;
            for (int c = 0; c < w.cols; ++c)
                acc += row[c] * y[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = acc;
        }
        y.resize(z.size());
        layer.activation.apply(z.data(), y.data());
    }
    return y;
}

Network parse_network(const std::string& document)
{
    std::vector<std::string> lines;
    {
        std::stringstream ss(document);
        std::string line;
        while (std::getline(ss, line)) {
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos)
                line = line.substr(0, hash);
            lines.push_back(trim(line));
        }
    }

    std::size_t pos = 0;
    const auto next_line = [&](bool required) -> int {
        while (pos < lines.size() && lines[pos].empty())
            ++pos;
        if (pos == lines.size()) {
            if (required)
                parse_fail(static_cast<int>(lines.size()) + 1, "unexpected end of document");
            return -1;
        }
        return static_cast<int>(pos + 1);
    };

    int ln = next_line(true);
    if (lines[pos] != "lipnet 1")
        parse_fail(ln, "expected header 'lipnet 1'");
    ++pos;

    ln = next_line(true);
    if (lines[pos].rfind("input_dim", 0) != 0)
        parse_fail(ln, "expected 'input_dim <N>'");
    const double n0 = parse_decimal(lines[pos].substr(9), ln);
    if (n0 < 1 || n0 != std::floor(n0))
        parse_fail(ln, "input_dim must be a positive integer");
    ++pos;

    Network net;
    net.input_dim = static_cast<int>(n0);
    int prev_dim = net.input_dim;

    while (next_line(false) != -1) {
        ln = static_cast<int>(pos + 1);
        if (lines[pos] != "layer")
            parse_fail(ln, "expected 'layer', got '" + lines[pos] + "'");
        ++pos;

        ln = next_line(true);
        if (lines[pos].rfind("dims", 0) != 0)
            parse_fail(ln, "expected 'dims <rows> <cols>'");
        std::stringstream ds(lines[pos].substr(4));
        int rows = 0, cols = 0;
        if (!(ds >> rows >> cols) || rows < 1 || cols < 1)
            parse_fail(ln, "expected two positive integers after 'dims'");
        std::string leftover;
        if (ds >> leftover)
            parse_fail(ln, "trailing tokens after dims");
        if (cols != prev_dim)
            parse_fail(ln, "dimension chain mismatch: layer takes " + std::to_string(cols) +
                               " inputs but the previous stage produces " +
                               std::to_string(prev_dim));
        ++pos;

        ln = next_line(true);
        if (lines[pos] != "weights")
            parse_fail(ln, "expected 'weights'");
        ++pos;

        Matrix weight(rows, cols);
        for (int r = 0; r < rows; ++r) {
            ln = next_line(true);
            const std::vector<double> row = parse_csv(lines[pos], ln);
            if (static_cast<int>(row.size()) != cols)
                parse_fail(ln, "weight row has " + std::to_string(row.size()) +
                                   " entries, expected " + std::to_string(cols));
            for (int c = 0; c < cols; ++c) {
                if (!std::isfinite(row[static_cast<std::size_t>(c)]))
                    parse_fail(ln, "non-finite weight entry");
                weight.at(r, c) = row[static_cast<std::size_t>(c)];
            }
            ++pos;
        }

        ln = next_line(true);
        if (lines[pos].rfind("bias", 0) != 0)
            parse_fail(ln, "expected 'bias <csv>'");
        const std::vector<double> bias = parse_csv(lines[pos].substr(4), ln);
        if (static_cast<int>(bias.size()) != rows)
            parse_fail(ln, "bias has " + std::to_string(bias.size()) + " entries, expected " +
                               std::to_string(rows));
        ++pos;

        ln = next_line(true);
        if (lines[pos].rfind("activation", 0) != 0)
            parse_fail(ln, "expected 'activation <spec>'");
        VectorActivation activation =
            build_activation(parse_activation_text(trim(lines[pos].substr(10)), ln), rows, ln);
        ++pos;

        if (next_line(false) != -1 && lines[pos].rfind("alpha", 0) == 0) {
            ln = static_cast<int>(pos + 1);
            const double alpha = parse_decimal(lines[pos].substr(5), ln);
            if (!(alpha >= 0.0 && alpha <= 1.0))
                parse_fail(ln, "alpha must lie in [0, 1]");
            activation.override_alpha(alpha);
            ++pos;
        }

        net.layers.push_back(Layer{std::move(weight), bias, std::move(activation)});
        prev_dim = rows;
    }

    if (net.layers.empty())
        parse_fail(static_cast<int>(lines.size()), "document contains no layers");
    net.validate();
    return net;
}

std::string serialize_network(const Network& net)
{
    net.validate();
    std::string out = "lipnet 1\n";
    out += "input_dim " + std::to_string(net.input_dim) + "\n";
    for (const Layer& layer : net.layers) {
        const Matrix& w = layer.weight;
        out += "layer\n";
        out += "  dims " + std::to_string(w.rows) + " " + std::to_string(w.cols) + "\n";
        out += "  weights\n";
        for (int r = 0; r < w.rows; ++r) {
            out += "  ";
            for (int c = 0; c < w.cols; ++c) {
                if (c)
                    out += ',';
                out += format_decimal(w.at(r, c));
            }
            out += '\n';
        }
        out += "  bias ";
        for (std::size_t k = 0; k < layer.bias.size(); ++k) {
            if (k)
                out += ',';
            out += format_decimal(layer.bias[k]);
        }
        out += '\n';
        out += "  activation " + activation_text(layer.activation) + "\n";
        out += "  alpha " + format_decimal(layer.activation.alpha) + "\n";
    }
    return out;
}

} // namespace lipcert
