#include "bcbound/formats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bcbound {

using nlohmann::json;

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << text;
}

int get_int(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ParseError(where + ": missing integer field '" + key + "'");
    return j[key].get<int>();
}

double get_real(const json& j) {
    if (!j.is_number()) throw ParseError("expected a number");
    return j.get<double>();
}

// Flattens a nested numeric array against the expected dimensions.
void flatten(const json& j, const std::vector<int>& dims, std::size_t level,
             std::vector<double>& out, const std::string& where) {
    if (level == dims.size()) {
        if (!j.is_number()) throw ParseError(where + ": expected a number");
        out.push_back(get_real(j));
        return;
    }
    if (!j.is_array() ||
        j.size() != static_cast<std::size_t>(dims[level]))
        throw ParseError(where + ": expected an array of length " +
                         std::to_string(dims[level]));
    for (const auto& item : j) flatten(item, dims, level + 1, out, where);
}

Eigen::ArrayXd parse_tensor(const json& j, const std::vector<int>& dims,
                            const std::string& where) {
    std::vector<double> flat;
    flatten(j, dims, 0, flat, where);
    return Eigen::Map<Eigen::ArrayXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

// Renormalizes each row exactly when decimal-to-binary conversion left the
// sum measurably off 1; idempotent, so emitted files reload bit-exactly.
void normalize_rows(Eigen::ArrayXd& table, Eigen::Index rows, Eigen::Index cols,
                    double tol, const std::string& what) {
    for (Eigen::Index r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (table[r * cols + c] < -1e-15)
                throw ParseError(what + ": negative entry in row " + std::to_string(r));
            sum += table[r * cols + c];
        }
        if (std::abs(sum - 1.0) > tol)
            throw ParseError(what + ": row " + std::to_string(r) + " sums to " +
                             format_real(sum) + ", not 1");
        if (std::abs(sum - 1.0) > 1e-13)
            for (Eigen::Index c = 0; c < cols; ++c) table[r * cols + c] /= sum;
    }
}

std::string render_tensor(const Eigen::ArrayXd& flat, const std::vector<int>& dims,
                          std::size_t level, Eigen::Index& at) {
    std::string out = "[";
    if (level + 1 == dims.size()) {
        for (int i = 0; i < dims[level]; ++i) {
            if (i) out += ", ";
            out += format_real(flat[at++]);
        }
    } else {
        for (int i = 0; i < dims[level]; ++i) {
            if (i) out += ", ";
            out += render_tensor(flat, dims, level + 1, at);
        }
    }
    return out + "]";
}

std::string render_tensor(const Eigen::ArrayXd& flat, const std::vector<int>& dims) {
    Eigen::Index at = 0;
    return render_tensor(flat, dims, 0, at);
}

}  // namespace

Channel load_channel(const std::string& path) {
    json j = load_json(path);
    int x = get_int(j, "x", path);
    int y1 = get_int(j, "y1", path);
    int y2 = get_int(j, "y2", path);
    if (x < 1 || y1 < 1 || y2 < 1) throw ParseError(path + ": cardinalities must be >= 1");
    if (!j.contains("law")) throw ParseError(path + ": missing 'law'");
    Eigen::ArrayXd law = parse_tensor(j["law"], {x, y1, y2}, path + ": law");
    normalize_rows(law, x, static_cast<Eigen::Index>(y1) * y2, 1e-9, path + ": law");
    return Channel(x, y1, y2, law);
}

void save_channel(const Channel& ch, const std::string& path) {
    std::ostringstream out;
    out << "{\n  \"x\": " << ch.x_card() << ",\n  \"y1\": " << ch.y1_card()
        << ",\n  \"y2\": " << ch.y2_card() << ",\n  \"law\": "
        << render_tensor(ch.law(), {ch.x_card(), ch.y1_card(), ch.y2_card()}) << "\n}\n";
    write_text(path, out.str());
}

SchemeVariant load_scheme(const std::string& path) {
    json j = load_json(path);
    if (!j.contains("type") || !j["type"].is_string())
        throw ParseError(path + ": missing 'type' (\"private\" or \"common\")");
    std::string type = j["type"].get<std::string>();
    if (!j.contains("cards")) throw ParseError(path + ": missing 'cards'");
    const json& jc = j["cards"];
    int x = get_int(j, "x", path);

    if (type == "private") {
        PrivateScheme s;
        s.cards = {get_int(jc, "u", path), get_int(jc, "v", path), get_int(jc, "w1", path),
                   get_int(jc, "w2", path), 0};
        s.x_card = x;
        s.p_u = parse_tensor(j.at("p_u"), {s.cards.u}, path + ": p_u");
        s.p_v = parse_tensor(j.at("p_v"), {s.cards.v}, path + ": p_v");
        s.p_w_given_uv = parse_tensor(j.at("p_w_given_uv"),
                                      {s.cards.u, s.cards.v, s.cards.w1, s.cards.w2},
                                      path + ": p_w_given_uv");
        s.p_x_given_uvw =
            parse_tensor(j.at("p_x_given_uvw"),
                         {s.cards.u, s.cards.v, s.cards.w1, s.cards.w2, x},
                         path + ": p_x_given_uvw");
        Eigen::Index w = static_cast<Eigen::Index>(s.cards.w1) * s.cards.w2;
        Eigen::Index uv = static_cast<Eigen::Index>(s.cards.u) * s.cards.v;
        normalize_rows(s.p_u, 1, s.cards.u, 1e-9, path + ": p_u");
        normalize_rows(s.p_v, 1, s.cards.v, 1e-9, path + ": p_v");
        normalize_rows(s.p_w_given_uv, uv, w, 1e-9, path + ": p_w_given_uv");
        normalize_rows(s.p_x_given_uvw, uv * w, x, 1e-9, path + ": p_x_given_uvw");
        validate(s);
        return s;
    }
    if (type != "common") throw ParseError(path + ": unknown scheme type '" + type + "'");

    CommonScheme s;
    s.cards = {get_int(jc, "u", path), get_int(jc, "v", path), get_int(jc, "w1", path),
               get_int(jc, "w2", path), get_int(jc, "t", path)};
    s.x_card = x;
    s.p_t = parse_tensor(j.at("p_t"), {s.cards.t}, path + ": p_t");
    s.p_u = parse_tensor(j.at("p_u"), {s.cards.u}, path + ": p_u");
    s.p_v = parse_tensor(j.at("p_v"), {s.cards.v}, path + ": p_v");
    s.p_w_given_tuv = parse_tensor(j.at("p_w_given_tuv"),
                                   {s.cards.t, s.cards.u, s.cards.v, s.cards.w1, s.cards.w2},
                                   path + ": p_w_given_tuv");
    Eigen::Index tuv = static_cast<Eigen::Index>(s.cards.t) * s.cards.u * s.cards.v;
    Eigen::Index w = static_cast<Eigen::Index>(s.cards.w1) * s.cards.w2;
    normalize_rows(s.p_t, 1, s.cards.t, 1e-9, path + ": p_t");
    normalize_rows(s.p_u, 1, s.cards.u, 1e-9, path + ": p_u");
    normalize_rows(s.p_v, 1, s.cards.v, 1e-9, path + ": p_v");
    normalize_rows(s.p_w_given_tuv, tuv, w, 1e-9, path + ": p_w_given_tuv");
    if (j.contains("x_map")) {
        s.deterministic_x = true;
        const json& jm = j["x_map"];
        std::vector<double> flat;
        flatten(jm, {s.cards.t, s.cards.u, s.cards.v, s.cards.w1, s.cards.w2}, 0, flat,
                path + ": x_map");
        for (double v : flat) {
            if (v != std::floor(v)) throw ParseError(path + ": x_map entries must be integers");
            s.x_map.push_back(static_cast<int>(v));
        }
    } else if (j.contains("p_x_given_tuvw")) {
        s.deterministic_x = false;
        s.p_x_given_tuvw = parse_tensor(
            j.at("p_x_given_tuvw"),
            {s.cards.t, s.cards.u, s.cards.v, s.cards.w1, s.cards.w2, x},
            path + ": p_x_given_tuvw");
        normalize_rows(s.p_x_given_tuvw, tuv * w, x, 1e-9, path + ": p_x_given_tuvw");
    } else {
        throw ParseError(path + ": common scheme needs 'x_map' or 'p_x_given_tuvw'");
    }
    validate(s);
    return s;
}

void save_scheme(const SchemeVariant& scheme, const std::string& path) {
    std::ostringstream out;
    if (std::holds_alternative<PrivateScheme>(scheme)) {
        const auto& s = std::get<PrivateScheme>(scheme);
        out << "{\n  \"type\": \"private\",\n  \"cards\": {\"u\": " << s.cards.u
            << ", \"v\": " << s.cards.v << ", \"w1\": " << s.cards.w1
            << ", \"w2\": " << s.cards.w2 << "},\n  \"x\": " << s.x_card << ",\n"
            << "  \"p_u\": " << render_tensor(s.p_u, {s.cards.u}) << ",\n"
            << "  \"p_v\": " << render_tensor(s.p_v, {s.cards.v}) << ",\n"
            << "  \"p_w_given_uv\": "
            << render_tensor(s.p_w_given_uv, {s.cards.u, s.cards.v, s.cards.w1, s.cards.w2})
            << ",\n  \"p_x_given_uvw\": "
            << render_tensor(s.p_x_given_uvw,
                             {s.cards.u, s.cards.v, s.cards.w1, s.cards.w2, s.x_card})
            << "\n}\n";
    } else {
        const auto& s = std::get<CommonScheme>(scheme);
        out << "{\n  \"type\": \"common\",\n  \"cards\": {\"t\": " << s.cards.t
            << ", \"u\": " << s.cards.u << ", \"v\": " << s.cards.v
            << ", \"w1\": " << s.cards.w1 << ", \"w2\": " << s.cards.w2
            << "},\n  \"x\": " << s.x_card << ",\n"
            << "  \"p_t\": " << render_tensor(s.p_t, {s.cards.t}) << ",\n"
            << "  \"p_u\": " << render_tensor(s.p_u, {s.cards.u}) << ",\n"
            << "  \"p_v\": " << render_tensor(s.p_v, {s.cards.v}) << ",\n"
            << "  \"p_w_given_tuv\": "
            << render_tensor(s.p_w_given_tuv,
                             {s.cards.t, s.cards.u, s.cards.v, s.cards.w1, s.cards.w2});
        if (s.deterministic_x) {
            Eigen::ArrayXd map_values(static_cast<Eigen::Index>(s.x_map.size()));
            for (std::size_t i = 0; i < s.x_map.size(); ++i)
                map_values[static_cast<Eigen::Index>(i)] = s.x_map[i];
            out << ",\n  \"x_map\": "
                << render_tensor(map_values, {s.cards.t, s.cards.u, s.cards.v, s.cards.w1,
                                              s.cards.w2});
        } else {
            out << ",\n  \"p_x_given_tuvw\": "
                << render_tensor(s.p_x_given_tuvw, {s.cards.t, s.cards.u, s.cards.v,
                                                    s.cards.w1, s.cards.w2, s.x_card});
        }
        out << "\n}\n";
    }
    write_text(path, out.str());
}

BlockCode load_code(const std::string& path) {
    json j = load_json(path);
    BlockCode code;
    code.n = get_int(j, "n", path);
    code.m1_card = get_int(j, "m1", path);
    code.m2_card = get_int(j, "m2", path);
    code.m0_card = j.contains("m0") ? get_int(j, "m0", path) : 1;
    if (!j.contains("encoder")) throw ParseError(path + ": missing 'encoder'");
    std::vector<int> dims;
    if (code.m0_card > 1) dims.push_back(code.m0_card);
    dims.push_back(code.m1_card);
    dims.push_back(code.m2_card);
    dims.push_back(code.n);
    std::vector<double> flat;
    flatten(j["encoder"], dims, 0, flat, path + ": encoder");
    std::size_t rows = flat.size() / static_cast<std::size_t>(code.n);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<int> seq;
        for (int i = 0; i < code.n; ++i) {
            double v = flat[r * static_cast<std::size_t>(code.n) + static_cast<std::size_t>(i)];
            if (v != std::floor(v) || v < 0)
                throw ParseError(path + ": encoder symbols must be nonnegative integers");
            seq.push_back(static_cast<int>(v));
        }
        code.encoder.push_back(std::move(seq));
    }
    return code;
}

void save_code(const BlockCode& code, const std::string& path) {
    std::ostringstream out;
    out << "{\n  \"n\": " << code.n << ",\n";
    if (code.m0_card > 1) out << "  \"m0\": " << code.m0_card << ",\n";
    out << "  \"m1\": " << code.m1_card << ",\n  \"m2\": " << code.m2_card
        << ",\n  \"encoder\": [";
    std::size_t row = 0;
    auto render_row = [&] {
        out << "[";
        for (std::size_t i = 0; i < code.encoder[row].size(); ++i) {
            if (i) out << ", ";
            out << code.encoder[row][i];
        }
        out << "]";
        ++row;
    };
    for (int m0 = 0; m0 < code.m0_card; ++m0) {
        if (m0) out << ", ";
        if (code.m0_card > 1) out << "[";
        for (int m1 = 0; m1 < code.m1_card; ++m1) {
            if (m1) out << ", ";
            out << "\n    [";
            for (int m2 = 0; m2 < code.m2_card; ++m2) {
                if (m2) out << ", ";
                render_row();
            }
            out << "]";
        }
        if (code.m0_card > 1) out << "]";
    }
    out << "\n  ]\n}\n";
    write_text(path, out.str());
}

ScanConfig load_scan_config(const std::string& path) {
    json j = load_json(path);
    ScanConfig cfg;
    if (j.contains("cards")) {
        const json& jc = j["cards"];
        cfg.search.cards = {get_int(jc, "u", path), get_int(jc, "v", path),
                            get_int(jc, "w1", path), get_int(jc, "w2", path),
                            jc.contains("t") ? get_int(jc, "t", path) : 0};
    } else {
        // Default: private scheme with every auxiliary alphabet as large as
        // the channel input; resolved against the channel at run time.
        cfg.search.cards = {0, 0, 0, 0, 0};
    }
    if (j.contains("deterministic_x")) {
        if (!j["deterministic_x"].is_boolean())
            throw ParseError(path + ": 'deterministic_x' must be a boolean");
        cfg.search.deterministic_x = j["deterministic_x"].get<bool>();
    }
    cfg.search.restarts = get_int(j, "restarts", path);
    cfg.search.max_iters = j.contains("max_iters") ? get_int(j, "max_iters", path) : 300;
    if (j.contains("constraint_tol")) cfg.search.constraint_tol = get_real(j["constraint_tol"]);
    if (j.contains("penalty_schedule")) {
        cfg.search.penalty_schedule.clear();
        for (const auto& w : j["penalty_schedule"])
            cfg.search.penalty_schedule.push_back(get_real(w));
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw ParseError(path + ": 'seed' must be integer");
        cfg.search.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("jobs")) cfg.search.jobs = get_int(j, "jobs", path);
    int rate_dim = cfg.search.cards.t >= 1 ? 3 : 2;
    if (j.contains("rate_weights")) {
        const auto& jw = j["rate_weights"];
        if (!jw.is_array() || static_cast<int>(jw.size()) != rate_dim)
            throw ParseError(path + ": 'rate_weights' must have " + std::to_string(rate_dim) +
                             " entries");
        cfg.search.rate_weights.resize(rate_dim);
        for (int i = 0; i < rate_dim; ++i) cfg.search.rate_weights[i] = get_real(jw[i]);
    }
    if (j.contains("lambda_sweep")) {
        for (const auto& jl : j["lambda_sweep"]) {
            if (!jl.is_array() || static_cast<int>(jl.size()) != rate_dim)
                throw ParseError(path + ": each sweep entry needs " + std::to_string(rate_dim) +
                                 " weights");
            Eigen::VectorXd l(rate_dim);
            for (int i = 0; i < rate_dim; ++i) l[i] = get_real(jl[i]);
            cfg.lambda_sweep.push_back(std::move(l));
        }
    }
    if (cfg.lambda_sweep.empty()) {
        if (cfg.search.rate_weights.size() == rate_dim)
            cfg.lambda_sweep.push_back(cfg.search.rate_weights);
        else
            throw ParseError(path + ": needs 'lambda_sweep' or 'rate_weights'");
    }
    try {
        validate(cfg.search);
        for (const auto& l : cfg.lambda_sweep)
            for (Eigen::Index i = 0; i < l.size(); ++i)
                if (l[i] < 0.0) throw std::invalid_argument("negative sweep weight");
    } catch (const std::invalid_argument& e) {
        throw ParseError(path + ": " + e.what());
    }
    return cfg;
}

void save_scan_config(const ScanConfig& cfg, const std::string& path) {
    std::ostringstream out;
    const auto& s = cfg.search;
    out << "{\n  \"cards\": {";
    if (s.cards.t >= 1) out << "\"t\": " << s.cards.t << ", ";
    out << "\"u\": " << s.cards.u << ", \"v\": " << s.cards.v << ", \"w1\": " << s.cards.w1
        << ", \"w2\": " << s.cards.w2 << "},\n";
    if (s.cards.t >= 1)
        out << "  \"deterministic_x\": " << (s.deterministic_x ? "true" : "false") << ",\n";
    out << "  \"restarts\": " << s.restarts << ",\n  \"max_iters\": " << s.max_iters
        << ",\n  \"constraint_tol\": " << format_real(s.constraint_tol)
        << ",\n  \"penalty_schedule\": [";
    for (std::size_t i = 0; i < s.penalty_schedule.size(); ++i) {
        if (i) out << ", ";
        out << format_real(s.penalty_schedule[i]);
    }
    out << "],\n  \"seed\": " << s.seed << ",\n  \"jobs\": " << s.jobs
        << ",\n  \"lambda_sweep\": [";
    for (std::size_t i = 0; i < cfg.lambda_sweep.size(); ++i) {
        if (i) out << ", ";
        out << "[";
        for (Eigen::Index k = 0; k < cfg.lambda_sweep[i].size(); ++k) {
            if (k) out << ", ";
            out << format_real(cfg.lambda_sweep[i][k]);
        }
        out << "]";
    }
    out << "]\n}\n";
    write_text(path, out.str());
}

}  // namespace bcbound
