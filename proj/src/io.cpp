#include "mixl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mixl/errors.hpp"

namespace mixl::io {

namespace {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure on " + path.string());
    }
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("write failure on " + path.string());
    }
}

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ValidationError(section + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError(section + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& section) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(section + ": key '" + key + "' has the wrong type");
    }
}

json vec_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

Eigen::VectorXd json_to_vec(const json& j, const std::string& what, Eigen::Index expected = -1) {
    if (!j.is_array()) {
        throw ValidationError(what + " must be an array of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const auto& cell = j.at(static_cast<std::size_t>(i));
        if (!cell.is_number()) {
            throw ValidationError(what + " must contain only numbers");
        }
        v[i] = cell.get<double>();
    }
    if (expected >= 0 && v.size() != expected) {
        throw ValidationError(what + " has length " + std::to_string(v.size()) + ", expected " +
                              std::to_string(expected));
    }
    return v;
}

Eigen::MatrixXd json_to_mat(const json& j, const std::string& what, Eigen::Index rows = -1,
                            Eigen::Index cols = -1) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError(what + " must be a non-empty array of rows");
    }
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const Eigen::VectorXd row = json_to_vec(j.at(static_cast<std::size_t>(r)),
                                                what + " row " + std::to_string(r), cols);
        if (r == 0) {
            m.resize(n_rows, row.size());
        } else if (row.size() != m.cols()) {
            throw ValidationError(what + " has ragged rows");
        }
        m.row(r) = row.transpose();
    }
    if (rows >= 0 && m.rows() != rows) {
        throw ValidationError(what + " has " + std::to_string(m.rows()) + " rows, expected " +
                              std::to_string(rows));
    }
    return m;
}

void check_envelope(const json& j, const std::string& schema, const std::filesystem::path& path) {
    if (!j.is_object() || get_or<std::string>(j, "schema", "", path.string()) != schema) {
        throw ValidationError(path.string() + ": not a " + schema + " file");
    }
    if (get_or<int>(j, "version", 0, path.string()) != 1) {
        throw ValidationError(path.string() + ": unsupported schema version");
    }
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void save_dataset_csv(const ChoiceDataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ostringstream out;
    out << "person_id,occasion_id,alt_id,chosen";
    for (int c = 1; c <= data.num_coeffs; ++c) out << ",x" << c;
    out << "\n";
    for (int n = 0; n < data.num_persons(); ++n) {
        for (int t = 0; t < data.num_occasions(n); ++t) {
            const auto& occ = data.persons[n][t];
            for (Eigen::Index j = 0; j < occ.design.rows(); ++j) {
                out << (n + 1) << ',' << (t + 1) << ',' << (j + 1) << ','
                    << (occ.chosen == j ? 1 : 0);
                for (Eigen::Index c = 0; c < occ.design.cols(); ++c) {
                    out << ',' << format_double(occ.design(j, c));
                }
                out << "\n";
            }
        }
    }
    write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

int parse_int_field(const std::string& field, const char* what, long line_no) {
    int value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + what + " '" + field +
                              "' is not an integer");
    }
    return value;
}

double parse_double_field(const std::string& field, const char* what, long line_no) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + what + " '" + field +
                              "' is not a number");
    }
    return value;
}

}  // namespace

ChoiceDataset load_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) {
        throw ValidationError(path.string() + ": empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "person_id" || header[1] != "occasion_id" ||
        header[2] != "alt_id" || header[3] != "chosen") {
        throw ValidationError(path.string() +
                              ": header must be person_id,occasion_id,alt_id,chosen,x1,...");
    }
    const int k = static_cast<int>(header.size()) - 4;
    for (int c = 0; c < k; ++c) {
        if (header[static_cast<std::size_t>(4 + c)] != "x" + std::to_string(c + 1)) {
            throw ValidationError(path.string() + ": attribute columns must be named x1..x" +
                                  std::to_string(k) + " in order");
        }
    }

    ChoiceDataset data;
    data.num_coeffs = k;

    std::vector<Eigen::RowVectorXd> rows;
    int chosen_idx = -1;
    int chosen_count = 0;
    int cur_person = 0;
    int cur_occ = 0;
    long occ_first_line = 0;

    auto close_occasion = [&]() {
        if (rows.empty()) return;
        if (chosen_count != 1) {
            throw ValidationError("occasion starting at line " + std::to_string(occ_first_line) +
                                  ": needs exactly one chosen alternative, found " +
                                  std::to_string(chosen_count));
        }
        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), k);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            design.row(static_cast<Eigen::Index>(r)) = rows[r];
        }
        data.persons.back().push_back(ChoiceOccasion{std::move(design), chosen_idx});
        rows.clear();
        chosen_idx = -1;
        chosen_count = 0;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 4 + k) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(4 + k) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        const int person = parse_int_field(fields[0], "person_id", line_no);
        const int occ = parse_int_field(fields[1], "occasion_id", line_no);
        const int alt = parse_int_field(fields[2], "alt_id", line_no);
        const int chosen = parse_int_field(fields[3], "chosen", line_no);
        if (chosen != 0 && chosen != 1) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": chosen must be 0 or 1");
        }

        const bool same_occ = person == cur_person && occ == cur_occ;
        const bool next_occ = person == cur_person && occ == cur_occ + 1;
        const bool next_person = person == cur_person + 1 && occ == 1;
        if (same_occ) {
            if (alt != static_cast<int>(rows.size()) + 1) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": alt_id must increase by one within an occasion");
            }
        } else if (next_occ || next_person) {
            close_occasion();
            if (alt != 1) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": each occasion must start at alt_id 1");
            }
            if (next_person) data.persons.emplace_back();
            cur_person = person;
            cur_occ = occ;
            occ_first_line = line_no;
        } else {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": person_id/occasion_id must be sequential and grouped");
        }

        Eigen::RowVectorXd x(k);
        for (int c = 0; c < k; ++c) {
            x[c] = parse_double_field(fields[static_cast<std::size_t>(4 + c)],
                                      header[static_cast<std::size_t>(4 + c)].c_str(), line_no);
        }
        rows.push_back(std::move(x));
        if (chosen == 1) {
            chosen_idx = alt - 1;
            ++chosen_count;
        }
    }
    close_occasion();
    if (data.persons.empty()) {
        throw ValidationError(path.string() + ": no data rows");
    }
    data.validate();
    return data;
}

namespace {

json dgp_config_to_json(const DgpConfig& cfg) {
    json j;
    j["num_persons"] = cfg.num_persons;
    j["occasions_per_person"] = cfg.occasions_per_person;
    j["num_coeffs"] = cfg.num_coeffs;
    j["num_alternatives"] = cfg.num_alternatives;
    j["seed"] = cfg.seed;
    j["zeta_true"] = vec_to_json(cfg.zeta_true);
    j["sigma_b_true"] = mat_to_json(cfg.sigma_b_true);
    j["sigma_w_true"] = mat_to_json(cfg.sigma_w_true);
    return j;
}

DgpConfig dgp_config_from_json(const json& j, std::uint64_t fallback_seed) {
    const std::string section = "dgp";
    check_keys(j, section,
               {"num_persons", "occasions_per_person", "num_coeffs", "num_alternatives", "seed",
                "zeta_true", "sigma_b_true", "sigma_w_true"});
    const int n = get_or<int>(j, "num_persons", 1000, section);
    const int t = get_or<int>(j, "occasions_per_person", 20, section);
    const int k = get_or<int>(j, "num_coeffs", 4, section);
    const int a = get_or<int>(j, "num_alternatives", 5, section);
    const auto seed = get_or<std::uint64_t>(j, "seed", fallback_seed, section);
    DgpConfig cfg = DgpConfig::study_defaults(n, t, k, a, seed);
    if (j.contains("zeta_true")) cfg.zeta_true = json_to_vec(j.at("zeta_true"), "dgp.zeta_true", k);
    if (j.contains("sigma_b_true")) {
        cfg.sigma_b_true = json_to_mat(j.at("sigma_b_true"), "dgp.sigma_b_true", k, k);
    }
    if (j.contains("sigma_w_true")) {
        cfg.sigma_w_true = json_to_mat(j.at("sigma_w_true"), "dgp.sigma_w_true", k, k);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

void save_truth(const TruthBundle& bundle, const std::filesystem::path& path) {
    json j;
    j["schema"] = "mixl/truth";
    j["version"] = 1;
    j["dgp"] = dgp_config_to_json(bundle.config);
    j["zeta"] = vec_to_json(bundle.truth.zeta);
    j["sigma_b"] = mat_to_json(bundle.truth.sigma_b.matrix());
    j["sigma_w"] = mat_to_json(bundle.truth.sigma_w.matrix());
    json mu = json::array();
    for (const auto& m : bundle.truth.mu) mu.push_back(vec_to_json(m));
    j["mu"] = std::move(mu);
    json beta = json::array();
    for (const auto& person : bundle.truth.beta) {
        json row = json::array();
        for (const auto& b : person) row.push_back(vec_to_json(b));
        beta.push_back(std::move(row));
    }
    j["beta"] = std::move(beta);

    json between = json::array();
    for (const auto& sc : bundle.scenarios.between) {
        between.push_back(json{{"design", mat_to_json(sc.design)}, {"person", sc.person}});
    }
    json within = json::array();
    for (const auto& sc : bundle.scenarios.within) {
        within.push_back(json{{"design", mat_to_json(sc.design)}, {"person", sc.person}});
    }
    j["scenarios"] = json{{"between", std::move(between)}, {"within", std::move(within)}};
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

TruthBundle truth_from_json(const json& j, const std::filesystem::path& path) {
    check_envelope(j, "mixl/truth", path);
    check_keys(j, path.string(),
               {"schema", "version", "dgp", "zeta", "sigma_b", "sigma_w", "mu", "beta",
                "scenarios"});

    TruthBundle bundle;
    bundle.config = dgp_config_from_json(j.at("dgp"), 0);
    const int k = bundle.config.num_coeffs;
    bundle.truth.zeta = json_to_vec(j.at("zeta"), "zeta", k);
    bundle.truth.sigma_b = SpdMatrix::from_psd(json_to_mat(j.at("sigma_b"), "sigma_b", k, k));
    bundle.truth.sigma_w = SpdMatrix::from_psd(json_to_mat(j.at("sigma_w"), "sigma_w", k, k));
    bundle.truth.a_b = Eigen::VectorXd::Ones(k);
    bundle.truth.a_w = Eigen::VectorXd::Ones(k);
    for (const auto& m : j.at("mu")) bundle.truth.mu.push_back(json_to_vec(m, "mu entry", k));
    for (const auto& person : j.at("beta")) {
        std::vector<Eigen::VectorXd> row;
        for (const auto& b : person) row.push_back(json_to_vec(b, "beta entry", k));
        bundle.truth.beta.push_back(std::move(row));
    }

    const json& sc = j.at("scenarios");
    check_keys(sc, "scenarios", {"between", "within"});
    for (const auto& item : sc.at("between")) {
        bundle.scenarios.between.push_back(
            {json_to_mat(item.at("design"), "scenario design", -1, k),
             get_or<int>(item, "person", -1, "scenario")});
    }
    for (const auto& item : sc.at("within")) {
        bundle.scenarios.within.push_back(
            {json_to_mat(item.at("design"), "scenario design", -1, k),
             get_or<int>(item, "person", -1, "scenario")});
    }
    return bundle;
}

}  // namespace

TruthBundle load_truth(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    try {
        return truth_from_json(j, path);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_mcmc_fit(const McmcDraws& draws, const nlohmann::json& config_echo,
                   const std::filesystem::path& path) {
    json j;
    j["schema"] = "mixl/fit";
    j["version"] = 1;
    j["kind"] = "mcmc";
    j["num_coeffs"] = draws.num_coeffs;
    j["config"] = config_echo;
    j["tracked_persons"] = draws.tracked_persons;
    j["wall_seconds"] = draws.wall_seconds;
    if (draws.split_rhat_zeta.size() > 0) {
        j["split_rhat_zeta"] = vec_to_json(draws.split_rhat_zeta);
    }

    json chains = json::array();
    for (std::size_t c = 0; c < draws.zeta.size(); ++c) {
        json chain;
        json zeta = json::array();
        for (const auto& z : draws.zeta[c]) zeta.push_back(vec_to_json(z));
        chain["zeta"] = std::move(zeta);
        json sb = json::array();
        for (const auto& m : draws.sigma_b[c]) sb.push_back(mat_to_json(m));
        chain["sigma_b"] = std::move(sb);
        json sw = json::array();
        for (const auto& m : draws.sigma_w[c]) sw.push_back(mat_to_json(m));
        chain["sigma_w"] = std::move(sw);
        json mu = json::array();
        for (const auto& m : draws.mu_tracked[c]) mu.push_back(mat_to_json(m));
        chain["mu_tracked"] = std::move(mu);
        chain["acceptance_trace"] = draws.acceptance_trace[c];
        chain["final_proposal_step"] = draws.final_proposal_step[c];
        chains.push_back(std::move(chain));
    }
    j["chains"] = std::move(chains);
    write_text_file(path, j.dump() + "\n");
}

void save_vb_fit(const VbFit& fit, const nlohmann::json& config_echo,
                 const std::filesystem::path& path) {
    const auto& vp = fit.posterior;
    json j;
    j["schema"] = "mixl/fit";
    j["version"] = 1;
    j["kind"] = "vb";
    j["num_coeffs"] = vp.zeta_mean.size();
    j["config"] = config_echo;
    j["a_shape_b"] = vp.a_shape_b;
    j["a_shape_w"] = vp.a_shape_w;
    j["iw_dof_b"] = vp.iw_dof_b;
    j["iw_dof_w"] = vp.iw_dof_w;
    j["a_rate_b"] = vec_to_json(vp.a_rate_b);
    j["a_rate_w"] = vec_to_json(vp.a_rate_w);
    j["iw_scale_b"] = mat_to_json(vp.iw_scale_b.matrix());
    j["iw_scale_w"] = mat_to_json(vp.iw_scale_w.matrix());
    j["zeta_mean"] = vec_to_json(vp.zeta_mean);
    j["zeta_cov"] = mat_to_json(vp.zeta_cov.matrix());
    json mu_mean = json::array();
    for (const auto& m : vp.mu_mean) mu_mean.push_back(vec_to_json(m));
    j["mu_mean"] = std::move(mu_mean);
    json mu_cov = json::array();
    for (const auto& m : vp.mu_cov) mu_cov.push_back(mat_to_json(m.matrix()));
    j["mu_cov"] = std::move(mu_cov);
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["final_delta"] = fit.final_delta;
    j["damped"] = fit.damped;
    j["skipped"] = fit.skipped;
    j["wall_seconds"] = fit.wall_seconds;
    write_text_file(path, j.dump() + "\n");
}

namespace {

LoadedFit fit_from_json(const json& j, const std::filesystem::path& path) {
    check_envelope(j, "mixl/fit", path);
    LoadedFit out;
    out.kind = get_or<std::string>(j, "kind", "", path.string());
    out.config_echo = j.value("config", json::object());
    const int k = get_or<int>(j, "num_coeffs", 0, path.string());
    if (k < 1) {
        throw ValidationError(path.string() + ": missing num_coeffs");
    }

    if (out.kind == "mcmc") {
        McmcDraws& d = out.mcmc;
        d.num_coeffs = k;
        d.wall_seconds = get_or<double>(j, "wall_seconds", 0.0, path.string());
        d.tracked_persons = get_or<std::vector<int>>(j, "tracked_persons", {}, path.string());
        if (j.contains("split_rhat_zeta")) {
            d.split_rhat_zeta = json_to_vec(j.at("split_rhat_zeta"), "split_rhat_zeta", k);
        }
        if (!j.contains("chains") || !j.at("chains").is_array() || j.at("chains").empty()) {
            throw ValidationError(path.string() + ": fit has no chains");
        }
        const int n_track = static_cast<int>(d.tracked_persons.size());
        for (const auto& chain : j.at("chains")) {
            d.zeta.emplace_back();
            d.sigma_b.emplace_back();
            d.sigma_w.emplace_back();
            d.mu_tracked.emplace_back();
            for (const auto& z : chain.at("zeta")) {
                d.zeta.back().push_back(json_to_vec(z, "zeta draw", k));
            }
            for (const auto& m : chain.at("sigma_b")) {
                d.sigma_b.back().push_back(json_to_mat(m, "sigma_b draw", k, k));
            }
            for (const auto& m : chain.at("sigma_w")) {
                d.sigma_w.back().push_back(json_to_mat(m, "sigma_w draw", k, k));
            }
            for (const auto& m : chain.at("mu_tracked")) {
                d.mu_tracked.back().push_back(json_to_mat(m, "mu_tracked draw", n_track, k));
            }
            d.acceptance_trace.push_back(
                get_or<std::vector<double>>(chain, "acceptance_trace", {}, path.string()));
            d.final_proposal_step.push_back(
                get_or<double>(chain, "final_proposal_step", 0.0, path.string()));
            const std::size_t len = d.zeta.back().size();
            if (d.sigma_b.back().size() != len || d.sigma_w.back().size() != len ||
                d.mu_tracked.back().size() != len || len == 0) {
                throw ValidationError(path.string() + ": chain draw arrays are inconsistent");
            }
            if (d.zeta.back().size() != d.zeta.front().size()) {
                throw ValidationError(path.string() + ": chains have unequal lengths");
            }
        }
        return out;
    }
    if (out.kind == "vb") {
        VariationalPosterior& vp = out.vb.posterior;
        vp.a_shape_b = get_or<double>(j, "a_shape_b", 0.0, path.string());
        vp.a_shape_w = get_or<double>(j, "a_shape_w", 0.0, path.string());
        vp.iw_dof_b = get_or<double>(j, "iw_dof_b", 0.0, path.string());
        vp.iw_dof_w = get_or<double>(j, "iw_dof_w", 0.0, path.string());
        vp.a_rate_b = json_to_vec(j.at("a_rate_b"), "a_rate_b", k);
        vp.a_rate_w = json_to_vec(j.at("a_rate_w"), "a_rate_w", k);
        vp.iw_scale_b = SpdMatrix(json_to_mat(j.at("iw_scale_b"), "iw_scale_b", k, k));
        vp.iw_scale_w = SpdMatrix(json_to_mat(j.at("iw_scale_w"), "iw_scale_w", k, k));
        vp.zeta_mean = json_to_vec(j.at("zeta_mean"), "zeta_mean", k);
        vp.zeta_cov = SpdMatrix(json_to_mat(j.at("zeta_cov"), "zeta_cov", k, k));
        for (const auto& m : j.at("mu_mean")) {
            vp.mu_mean.push_back(json_to_vec(m, "mu_mean entry", k));
        }
        for (const auto& m : j.at("mu_cov")) {
            vp.mu_cov.emplace_back(json_to_mat(m, "mu_cov entry", k, k));
        }
        if (vp.mu_mean.size() != vp.mu_cov.size()) {
            throw ValidationError(path.string() + ": per-person moment arrays are inconsistent");
        }
        out.vb.iterations = get_or<int>(j, "iterations", 0, path.string());
        out.vb.converged = get_or<bool>(j, "converged", false, path.string());
        out.vb.final_delta = get_or<double>(j, "final_delta", 0.0, path.string());
        out.vb.damped = get_or<long>(j, "damped", 0, path.string());
        out.vb.skipped = get_or<long>(j, "skipped", 0, path.string());
        out.vb.wall_seconds = get_or<double>(j, "wall_seconds", 0.0, path.string());
        return out;
    }
    throw ValidationError(path.string() + ": unknown fit kind '" + out.kind + "'");
}

}  // namespace

LoadedFit load_fit(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    try {
        return fit_from_json(j, path);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_benchmark(const BenchmarkResult& result, const nlohmann::json& config_echo,
                    const std::filesystem::path& out_dir) {
    std::ostringstream summary;
    summary << "method,num_persons,occasions_per_person,replications_used,"
               "mean_tvd_between,se_tvd_between,mean_tvd_within,se_tvd_within,"
               "mean_fit_wall_seconds,se_fit_wall_seconds\n";
    for (const auto& s : result.summaries) {
        summary << s.method << ',' << s.num_persons << ',' << s.occasions_per_person << ','
                << s.replications_used << ',' << format_double(s.mean_tvd_between) << ','
                << format_double(s.se_tvd_between) << ',' << format_double(s.mean_tvd_within)
                << ',' << format_double(s.se_tvd_within) << ','
                << format_double(s.mean_fit_wall_seconds) << ','
                << format_double(s.se_fit_wall_seconds) << "\n";
    }
    write_text_file(out_dir / "summary.csv", summary.str());

    std::ostringstream reps;
    reps << "method,num_persons,occasions_per_person,replication,tvd_between,tvd_within,"
            "fit_wall_seconds,eval_wall_seconds,vb_iterations,vb_converged,mcmc_max_rhat\n";
    for (const auto& r : result.rows) {
        reps << r.method << ',' << r.num_persons << ',' << r.occasions_per_person << ','
             << r.replication << ',' << format_double(r.tvd_between) << ','
             << format_double(r.tvd_within) << ',' << format_double(r.fit_wall_seconds) << ','
             << format_double(r.eval_wall_seconds) << ',' << r.vb_iterations << ','
             << (r.vb_converged ? 1 : 0) << ',' << format_double(r.mcmc_max_rhat) << "\n";
    }
    write_text_file(out_dir / "replications.csv", reps.str());

    json j;
    j["schema"] = "mixl/benchmark";
    j["version"] = 1;
    j["config"] = config_echo;
    json rows = json::array();
    for (const auto& r : result.rows) {
        rows.push_back(json{{"method", r.method},
                            {"num_persons", r.num_persons},
                            {"occasions_per_person", r.occasions_per_person},
                            {"replication", r.replication},
                            {"tvd_between", r.tvd_between},
                            {"tvd_within", r.tvd_within},
                            {"fit_wall_seconds", r.fit_wall_seconds},
                            {"eval_wall_seconds", r.eval_wall_seconds},
                            {"vb_iterations", r.vb_iterations},
                            {"vb_converged", r.vb_converged},
                            {"mcmc_max_rhat", r.mcmc_max_rhat}});
    }
    j["replications"] = std::move(rows);
    json sums = json::array();
    for (const auto& s : result.summaries) {
        sums.push_back(json{{"method", s.method},
                            {"num_persons", s.num_persons},
                            {"occasions_per_person", s.occasions_per_person},
                            {"replications_used", s.replications_used},
                            {"mean_tvd_between", s.mean_tvd_between},
                            {"se_tvd_between", s.se_tvd_between},
                            {"mean_tvd_within", s.mean_tvd_within},
                            {"se_tvd_within", s.se_tvd_within},
                            {"mean_fit_wall_seconds", s.mean_fit_wall_seconds},
                            {"se_fit_wall_seconds", s.se_fit_wall_seconds}});
    }
    j["summaries"] = std::move(sums);
    j["warnings"] = result.warnings;
    write_text_file(out_dir / "results.json", j.dump(2) + "\n");
}

void save_report(const PredictiveReport& report, const std::filesystem::path& json_path,
                 const std::filesystem::path& csv_path) {
    json j;
    j["schema"] = "mixl/report";
    j["version"] = 1;
    j["method"] = report.method;
    j["tvd_between"] = report.tvd_between;
    j["tvd_within"] = report.tvd_within;
    j["mean_tvd_between"] = report.mean_tvd_between;
    j["mean_tvd_within"] = report.mean_tvd_within;
    j["n_outer"] = report.n_outer;
    j["n_inner"] = report.n_inner;
    j["n_true"] = report.n_true;
    j["wall_seconds"] = report.wall_seconds;
    write_text_file(json_path, j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "kind,scenario,tvd\n";
    for (std::size_t i = 0; i < report.tvd_between.size(); ++i) {
        csv << "between," << i << ',' << format_double(report.tvd_between[i]) << "\n";
    }
    for (std::size_t i = 0; i < report.tvd_within.size(); ++i) {
        csv << "within," << i << ',' << format_double(report.tvd_within[i]) << "\n";
    }
    write_text_file(csv_path, csv.str());
}

RunConfig default_run_config() { return parse_run_config(json::object()); }

RunConfig parse_run_config(const json& root) {
    check_keys(root, "config",
               {"seed", "dgp", "hyper", "mcmc", "vb", "eval", "scenarios", "benchmark"});
    RunConfig cfg;
    cfg.master_seed = get_or<std::uint64_t>(root, "seed", 0, "config");

    cfg.dgp = dgp_config_from_json(root.value("dgp", json::object()), cfg.master_seed);
    const int k = cfg.dgp.num_coeffs;

    const json hyper = root.value("hyper", json::object());
    check_keys(hyper, "hyper",
               {"zeta_prior_mean", "zeta_prior_variance", "nu_b", "nu_w", "half_t_scale",
                "half_t_scale_b", "half_t_scale_w"});
    cfg.hyper = Hyperparameters::defaults(k);
    if (hyper.contains("zeta_prior_mean")) {
        if (hyper.at("zeta_prior_mean").is_number()) {
            cfg.hyper.zeta_prior_mean =
                Eigen::VectorXd::Constant(k, hyper.at("zeta_prior_mean").get<double>());
        } else {
            cfg.hyper.zeta_prior_mean = json_to_vec(hyper.at("zeta_prior_mean"),
                                                    "hyper.zeta_prior_mean", k);
        }
    }
    if (hyper.contains("zeta_prior_variance")) {
        const double v = get_or<double>(hyper, "zeta_prior_variance", 10.0, "hyper");
        if (!(v > 0.0)) throw ValidationError("hyper.zeta_prior_variance must be positive");
        cfg.hyper.zeta_prior_cov = SpdMatrix(v * Eigen::MatrixXd::Identity(k, k));
    }
    cfg.hyper.nu_b = get_or<double>(hyper, "nu_b", cfg.hyper.nu_b, "hyper");
    cfg.hyper.nu_w = get_or<double>(hyper, "nu_w", cfg.hyper.nu_w, "hyper");
    if (hyper.contains("half_t_scale")) {
        const double s = get_or<double>(hyper, "half_t_scale", 1.04, "hyper");
        cfg.hyper.half_t_scale_b = Eigen::VectorXd::Constant(k, s);
        cfg.hyper.half_t_scale_w = Eigen::VectorXd::Constant(k, s);
    }
    if (hyper.contains("half_t_scale_b")) {
        cfg.hyper.half_t_scale_b = json_to_vec(hyper.at("half_t_scale_b"), "hyper.half_t_scale_b", k);
    }
    if (hyper.contains("half_t_scale_w")) {
        cfg.hyper.half_t_scale_w = json_to_vec(hyper.at("half_t_scale_w"), "hyper.half_t_scale_w", k);
    }
    cfg.hyper.validate(k);

    const json mcmc = root.value("mcmc", json::object());
    check_keys(mcmc, "mcmc",
               {"n_chains", "n_iter", "n_burn", "thin", "proposal_step", "adapt_target", "adapt",
                "adapt_batch", "n_track_mu", "parallel", "seed"});
    cfg.mcmc.n_chains = get_or<int>(mcmc, "n_chains", cfg.mcmc.n_chains, "mcmc");
    cfg.mcmc.n_iter = get_or<long>(mcmc, "n_iter", cfg.mcmc.n_iter, "mcmc");
    cfg.mcmc.n_burn = get_or<long>(mcmc, "n_burn", cfg.mcmc.n_burn, "mcmc");
    cfg.mcmc.thin = get_or<int>(mcmc, "thin", cfg.mcmc.thin, "mcmc");
    cfg.mcmc.proposal_step = get_or<double>(mcmc, "proposal_step", cfg.mcmc.proposal_step, "mcmc");
    cfg.mcmc.adapt_target = get_or<double>(mcmc, "adapt_target", cfg.mcmc.adapt_target, "mcmc");
    cfg.mcmc.adapt = get_or<bool>(mcmc, "adapt", cfg.mcmc.adapt, "mcmc");
    cfg.mcmc.adapt_batch = get_or<int>(mcmc, "adapt_batch", cfg.mcmc.adapt_batch, "mcmc");
    cfg.mcmc.n_track_mu = get_or<int>(mcmc, "n_track_mu", cfg.mcmc.n_track_mu, "mcmc");
    cfg.mcmc.parallel = get_or<bool>(mcmc, "parallel", cfg.mcmc.parallel, "mcmc");
    cfg.mcmc.seed = get_or<std::uint64_t>(mcmc, "seed", cfg.master_seed + 101, "mcmc");
    cfg.mcmc.validate();

    const json vb = root.value("vb", json::object());
    check_keys(vb, "vb", {"tolerance", "max_iter", "step_cap", "parallel"});
    cfg.vb.tolerance = get_or<double>(vb, "tolerance", cfg.vb.tolerance, "vb");
    cfg.vb.max_iter = get_or<int>(vb, "max_iter", cfg.vb.max_iter, "vb");
    cfg.vb.step_cap = get_or<double>(vb, "step_cap", cfg.vb.step_cap, "vb");
    cfg.vb.parallel = get_or<bool>(vb, "parallel", cfg.vb.parallel, "vb");
    cfg.vb.validate();

    const json eval = root.value("eval", json::object());
    check_keys(eval, "eval", {"n_outer", "n_inner", "n_true", "parallel", "seed"});
    cfg.eval.n_outer = get_or<int>(eval, "n_outer", cfg.eval.n_outer, "eval");
    cfg.eval.n_inner = get_or<int>(eval, "n_inner", cfg.eval.n_inner, "eval");
    cfg.eval.n_true = get_or<long>(eval, "n_true", cfg.eval.n_true, "eval");
    cfg.eval.parallel = get_or<bool>(eval, "parallel", cfg.eval.parallel, "eval");
    cfg.eval.seed = get_or<std::uint64_t>(eval, "seed", cfg.master_seed + 202, "eval");
    cfg.eval.validate();

    cfg.scenario_count = get_or<int>(root, "scenarios", cfg.scenario_count, "config");
    if (cfg.scenario_count < 1) {
        throw ValidationError("config: scenarios must be positive");
    }

    const json bench = root.value("benchmark", json::object());
    check_keys(bench, "benchmark", {"replications", "conditions"});
    cfg.replications = get_or<int>(bench, "replications", cfg.replications, "benchmark");
    if (cfg.replications < 1) {
        throw ValidationError("benchmark.replications must be positive");
    }
    if (bench.contains("conditions")) {
        if (!bench.at("conditions").is_array() || bench.at("conditions").empty()) {
            throw ValidationError("benchmark.conditions must be a non-empty array");
        }
        for (const auto& item : bench.at("conditions")) {
            check_keys(item, "benchmark condition", {"num_persons", "occasions_per_person"});
            RunConfig::Condition c;
            c.num_persons = get_or<int>(item, "num_persons", cfg.dgp.num_persons, "benchmark");
            c.occasions_per_person = get_or<int>(item, "occasions_per_person",
                                                 cfg.dgp.occasions_per_person, "benchmark");
            if (c.num_persons < 1 || c.occasions_per_person < 1) {
                throw ValidationError("benchmark condition sizes must be positive");
            }
            cfg.conditions.push_back(c);
        }
    } else {
        cfg.conditions.push_back({cfg.dgp.num_persons, cfg.dgp.occasions_per_person});
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(parse_json_file(path));
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.master_seed;
    j["dgp"] = dgp_config_to_json(cfg.dgp);
    j["hyper"] = json{{"zeta_prior_mean", vec_to_json(cfg.hyper.zeta_prior_mean)},
                      {"zeta_prior_variance", cfg.hyper.zeta_prior_cov.matrix()(0, 0)},
                      {"nu_b", cfg.hyper.nu_b},
                      {"nu_w", cfg.hyper.nu_w},
                      {"half_t_scale_b", vec_to_json(cfg.hyper.half_t_scale_b)},
                      {"half_t_scale_w", vec_to_json(cfg.hyper.half_t_scale_w)}};
    j["mcmc"] = json{{"n_chains", cfg.mcmc.n_chains},
                     {"n_iter", cfg.mcmc.n_iter},
                     {"n_burn", cfg.mcmc.n_burn},
                     {"thin", cfg.mcmc.thin},
                     {"proposal_step", cfg.mcmc.proposal_step},
                     {"adapt_target", cfg.mcmc.adapt_target},
                     {"adapt", cfg.mcmc.adapt},
                     {"adapt_batch", cfg.mcmc.adapt_batch},
                     {"n_track_mu", cfg.mcmc.n_track_mu},
                     {"parallel", cfg.mcmc.parallel},
                     {"seed", cfg.mcmc.seed}};
    j["vb"] = json{{"tolerance", cfg.vb.tolerance},
                   {"max_iter", cfg.vb.max_iter},
                   {"step_cap", cfg.vb.step_cap},
                   {"parallel", cfg.vb.parallel}};
    j["eval"] = json{{"n_outer", cfg.eval.n_outer},
                     {"n_inner", cfg.eval.n_inner},
                     {"n_true", cfg.eval.n_true},
                     {"parallel", cfg.eval.parallel},
                     {"seed", cfg.eval.seed}};
    j["scenarios"] = cfg.scenario_count;
    json conditions = json::array();
    for (const auto& c : cfg.conditions) {
        conditions.push_back(json{{"num_persons", c.num_persons},
                                  {"occasions_per_person", c.occasions_per_person}});
    }
    j["benchmark"] = json{{"replications", cfg.replications}, {"conditions", conditions}};
    return j;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs, const nlohmann::json& config_echo) {
    json j;
    j["schema"] = "mixl/manifest";
    j["version"] = 1;
    j["command"] = command;
    json in = json::object();
    for (const auto& [name, path] : inputs) in[name] = path;
    j["inputs"] = std::move(in);
    j["outputs"] = outputs;
    j["config"] = config_echo;
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace mixl::io
