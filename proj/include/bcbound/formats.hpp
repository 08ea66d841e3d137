// File formats: channels, schemes, block codes and search configs as JSON
// with named fields and nested arrays; reals are serialized with 17
// significant digits so every emitted file parses back bit-exactly.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bcbound/multiletter.hpp"
#include "bcbound/search.hpp"

namespace bcbound {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string format_real(double value);  // %.17g

Channel load_channel(const std::string& path);
void save_channel(const Channel& ch, const std::string& path);

SchemeVariant load_scheme(const std::string& path);
void save_scheme(const SchemeVariant& scheme, const std::string& path);

BlockCode load_code(const std::string& path);
void save_code(const BlockCode& code, const std::string& path);

struct ScanConfig {
    SearchConfig search;
    std::vector<Eigen::VectorXd> lambda_sweep;
};

ScanConfig load_scan_config(const std::string& path);
void save_scan_config(const ScanConfig& cfg, const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace bcbound
