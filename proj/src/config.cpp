#include "arcbandit/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arcbandit {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_items(const std::string& text)
{
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string item; in >> item;)
        out.push_back(item);
    return out;
}

} // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin)
{
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str(), path.string());
}

double parse_number(const std::string& text)
{
    const std::string s = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    if (used != s.size())
        throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

long long parse_integer(const std::string& text)
{
    const std::string s = trim(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not an integer: '" + text + "'");
    }
    if (used != s.size())
        throw std::invalid_argument("not an integer: '" + text + "'");
    return v;
}

bool parse_flag(const std::string& text)
{
    std::string s = trim(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "yes" || s == "1" || s == "on")
        return true;
    if (s == "false" || s == "no" || s == "0" || s == "off")
        return false;
    throw std::invalid_argument("not a boolean: '" + text + "'");
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    for (const auto& item : split_items(text))
        out.push_back(parse_number(item));
    return out;
}

std::vector<std::string> parse_word_list(const std::string& text)
{
    return split_items(text);
}

VectorXd parse_vector(const std::string& text)
{
    const auto values = parse_number_list(text);
    if (values.empty())
        throw std::invalid_argument("empty vector");
    return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

MatrixXd parse_square_matrix(const std::string& text)
{
    const auto values = parse_number_list(text);
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (n == 0 || static_cast<std::size_t>(n * n) != values.size())
        throw std::invalid_argument("matrix needs n*n entries, got " + std::to_string(values.size()));
    MatrixXd m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            m(i, j) = values[static_cast<std::size_t>(i * n + j)];
    return m;
}

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_list(const VectorXd& v)
{
    std::string out;
    for (Index i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += format_number(v(i));
    }
    return out;
}

std::string format_matrix(const MatrixXd& m)
{
    std::string out;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            if (i || j)
                out += ", ";
            out += format_number(m(i, j));
        }
    return out;
}

std::string market_prior_to_text(const MarketPrior& prior)
{
    return "market_mean = " + format_list(prior.mean) + "\nmarket_cov = " + format_matrix(prior.cov) + "\n";
}

MarketPrior market_prior_from_key_values(const KeyValues& kv)
{
    const auto mean = kv.find("market_mean");
    const auto cov = kv.find("market_cov");
    if (mean == kv.end() || cov == kv.end())
        throw std::invalid_argument("market prior needs both market_mean and market_cov");
    MarketPrior prior{parse_vector(mean->second), parse_square_matrix(cov->second)};
    prior.validate();
    return prior;
}

void write_market_prior(const std::filesystem::path& path, const MarketPrior& prior)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write market prior: " + path.string());
    out << "# Laplace posterior of the market parameter\n" << market_prior_to_text(prior);
}

MarketPrior read_market_prior(const std::filesystem::path& path)
{
    return market_prior_from_key_values(read_key_values(path));
}

} // namespace arcbandit
