#pragma once

#include "arcbandit/linalg.hpp"
#include "arcbandit/market.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace arcbandit {

/// Flat "key = value" file; '#' starts a comment, blank lines are skipped.
/// Later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text, const std::string& origin = "<string>");

std::vector<double> parse_number_list(const std::string& text);
std::vector<std::string> parse_word_list(const std::string& text);
double parse_number(const std::string& text);
long long parse_integer(const std::string& text);
bool parse_flag(const std::string& text);

/// Square matrix from a row-major list of n*n numbers.
MatrixXd parse_square_matrix(const std::string& text);
VectorXd parse_vector(const std::string& text);

/// Round-trip formatting of doubles (%.17g).
std::string format_number(double value);
std::string format_list(const VectorXd& v);
std::string format_matrix(const MatrixXd& m);

/// MarketPrior as "market_mean = ..." / "market_cov = ..." lines.
std::string market_prior_to_text(const MarketPrior& prior);
MarketPrior market_prior_from_key_values(const KeyValues& kv);
void write_market_prior(const std::filesystem::path& path, const MarketPrior& prior);
MarketPrior read_market_prior(const std::filesystem::path& path);

} // namespace arcbandit
