#include "btud/io.hpp"

#include "btud/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace btud {

using nlohmann::json;

namespace {

void append_number(std::string& buf, double v) {
    char tmp[32];
    const int len = std::snprintf(tmp, sizeof tmp, "%.17g", v);
    buf.append(tmp, static_cast<std::size_t>(len));
}

double read_value(std::istream& in, const char* what) {
    double v = 0.0;
    if (!(in >> v)) throw IoError(std::string("truncated or malformed ") + what + " data");
    if (!std::isfinite(v)) throw IoError(std::string("non-finite value in ") + what + " data");
    return v;
}

Index read_extent(std::istream& in, const char* what) {
    long long v = 0;
    if (!(in >> v) || v < 1) throw IoError(std::string("bad ") + what + " header");
    return static_cast<Index>(v);
}

void expect_end(std::istream& in, const char* what) {
    std::string extra;
    if (in >> extra) throw IoError(std::string("trailing content after ") + what + " data");
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        // stod rejects "nan" spellings from some writers; the statistic column may hold one.
        if (s == "nan" || s == "-nan") return std::nan("");
        throw IoError("malformed number '" + s + "' in " + path.string());
    }
}

json matrix_json(const Matrix& a) {
    json rows = json::array();
    for (Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, Index cols) {
    Matrix a(static_cast<Index>(j.size()), cols);
    for (Index r = 0; r < a.rows(); ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Index>(row.size()) != cols) throw IoError("model factor row has wrong length");
        for (Index c = 0; c < cols; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return a;
}

}  // namespace

std::string format_number(double v) {
    std::string s;
    append_number(s, v);
    return s;
}

void write_tensor(std::ostream& out, const Tensor3& t) {
    const Dims3& d = t.dims();
    std::string buf = "T3 " + std::to_string(d.n) + " " + std::to_string(d.m) + " " +
                      std::to_string(d.k) + "\n";
    // One line per (j, k) fiber keeps lines short.
    Index col = 0;
    for (double v : t.values()) {
        append_number(buf, v);
        buf.push_back(++col == d.n ? '\n' : ' ');
        if (col == d.n) col = 0;
    }
    out << buf;
    if (!out) throw IoError("failed writing tensor data");
}

void write_matrix(std::ostream& out, const Matrix& a) {
    std::string buf = "M2 " + std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (Index r = 0; r < a.rows(); ++r) {
        for (Index c = 0; c < a.cols(); ++c) {
            append_number(buf, a(r, c));
            buf.push_back(c + 1 == a.cols() ? '\n' : ' ');
        }
    }
    out << buf;
    if (!out) throw IoError("failed writing matrix data");
}

namespace {

Tensor3 read_tensor_body(std::istream& in) {
    const Index n = read_extent(in, "tensor");
    const Index m = read_extent(in, "tensor");
    const Index k = read_extent(in, "tensor");
    std::vector<double> values(static_cast<std::size_t>(n * m * k));
    for (double& v : values) v = read_value(in, "tensor");
    expect_end(in, "tensor");
    return Tensor3({n, m, k}, std::move(values));
}

Matrix read_matrix_body(std::istream& in) {
    const Index rows = read_extent(in, "matrix");
    const Index cols = read_extent(in, "matrix");
    Matrix a(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) a(r, c) = read_value(in, "matrix");
    }
    expect_end(in, "matrix");
    return a;
}

}  // namespace

Tensor3 read_tensor(std::istream& in) {
    std::string tag;
    if (!(in >> tag) || tag != "T3") throw IoError("missing T3 header");
    return read_tensor_body(in);
}

Matrix read_matrix(std::istream& in) {
    std::string tag;
    if (!(in >> tag) || tag != "M2") throw IoError("missing M2 header");
    return read_matrix_body(in);
}

DataArray read_data(std::istream& in) {
    std::string tag;
    if (!(in >> tag)) throw IoError("empty data file");
    if (tag == "T3") return read_tensor_body(in);
    if (tag == "M2") return read_matrix_body(in);
    throw IoError("unknown data header '" + tag + "'");
}

void save_data(const std::filesystem::path& path, const DataArray& data) {
    std::ostringstream out;
    std::visit(
        [&out](const auto& d) {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, Tensor3>) {
                write_tensor(out, d);
            } else {
                write_matrix(out, d);
            }
        },
        data);
    write_file(path, out.str());
}

DataArray load_data(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    try {
        return read_data(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_truth(const std::filesystem::path& path, const std::vector<bool>& truth) {
    std::string buf = "truth\n";
    for (bool t : truth) buf += t ? "1\n" : "0\n";
    write_file(path, buf);
}

std::vector<bool> load_truth(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "truth") throw IoError(path.string() + ": missing 'truth' header");
    std::vector<bool> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "1") {
            out.push_back(true);
        } else if (line == "0") {
            out.push_back(false);
        } else {
            throw IoError(path.string() + ": truth rows must be 0 or 1");
        }
    }
    return out;
}

void write_selection_csv(std::ostream& out, const SelectionResult& r) {
    std::string buf = "feature_index,statistic,p_raw,p_adjusted,selected\n";
    for (std::size_t i = 0; i < r.p_raw.size(); ++i) {
        buf += std::to_string(i + 1);
        buf.push_back(',');
        append_number(buf, r.statistic[i]);
        buf.push_back(',');
        append_number(buf, r.p_raw[i]);
        buf.push_back(',');
        append_number(buf, r.p_adjusted[i]);
        buf += r.selected[i] ? ",1\n" : ",0\n";
    }
    out << buf;
    if (!out) throw IoError("failed writing selection CSV");
}

void save_selection(const std::filesystem::path& path, const SelectionResult& r) {
    std::ostringstream out;
    write_selection_csv(out, r);
    write_file(path, out.str());
}

SelectionResult load_selection(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "feature_index,statistic,p_raw,p_adjusted,selected") {
        throw IoError(path.string() + ": not a selection CSV");
    }
    SelectionResult r;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 5) throw IoError(path.string() + ": selection rows need 5 columns");
        if (cells[0] != std::to_string(r.p_raw.size() + 1)) {
            throw IoError(path.string() + ": feature_index out of sequence");
        }
        r.statistic.push_back(parse_double(cells[1], path));
        r.p_raw.push_back(parse_double(cells[2], path));
        r.p_adjusted.push_back(parse_double(cells[3], path));
        if (cells[4] != "0" && cells[4] != "1") throw IoError(path.string() + ": selected must be 0 or 1");
        r.selected.push_back(cells[4] == "1");
    }
    return r;
}

std::string model_to_json(const ModelDocument& doc) {
    const TuckerModel& m = doc.model;
    const Ranks r = m.ranks();
    const Dims3 d = m.data_dims();
    json j;
    j["dims"] = {d.n, d.m, d.k};
    j["ranks"] = {r.l1, r.l2, r.l3};
    j["factors"] = {matrix_json(m.factors[0]), matrix_json(m.factors[1]), matrix_json(m.factors[2])};
    j["core"] = std::vector<double>(m.core.values().begin(), m.core.values().end());
    j["alpha"] = doc.alpha;
    j["beta"] = doc.beta;
    j["solver"] = doc.solver;
    j["report"] = {{"sweeps", doc.report.sweeps},
                   {"residual_history", doc.report.residual_history},
                   {"converged", doc.report.converged},
                   {"self_consistent", doc.report.self_consistent},
                   {"max_mode_deviation", doc.report.max_mode_deviation}};
    if (doc.consistency) {
        const SelfConsistency& c = *doc.consistency;
        j["self_consistency"] = {{"self_consistent", c.self_consistent},
                                 {"mode_deviation", c.mode_deviation},
                                 {"core_deviation", c.core_deviation}};
    }
    return j.dump(1) + "\n";
}

ModelDocument model_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ModelDocument doc;
        const auto dims = j.at("dims").get<std::vector<Index>>();
        const auto ranks = j.at("ranks").get<std::vector<Index>>();
        if (dims.size() != 3 || ranks.size() != 3) throw IoError("model dims and ranks need 3 entries");
        for (std::size_t a = 0; a < 3; ++a) {
            doc.model.factors[a] = matrix_from_json(j.at("factors").at(a), dims[a]);
            if (doc.model.factors[a].rows() != ranks[a]) throw IoError("model factor rank mismatch");
        }
        doc.model.core = Tensor3({ranks[0], ranks[1], ranks[2]}, j.at("core").get<std::vector<double>>());
        doc.model.validate();
        doc.alpha = j.at("alpha").get<double>();
        doc.beta = j.at("beta").get<double>();
        doc.solver = j.value("solver", std::string{});
        const json& rep = j.at("report");
        doc.report.sweeps = rep.at("sweeps").get<int>();
        doc.report.residual_history = rep.at("residual_history").get<std::vector<double>>();
        doc.report.converged = rep.at("converged").get<bool>();
        doc.report.self_consistent = rep.at("self_consistent").get<bool>();
        doc.report.max_mode_deviation = rep.at("max_mode_deviation").get<double>();
        if (j.contains("self_consistency")) {
            const json& c = j.at("self_consistency");
            SelfConsistency sc;
            sc.self_consistent = c.at("self_consistent").get<bool>();
            sc.mode_deviation = c.at("mode_deviation").get<std::array<double, 3>>();
            sc.core_deviation = c.at("core_deviation").get<double>();
            doc.consistency = sc;
        }
        return doc;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed model JSON: ") + e.what());
    } catch (const ArgumentError& e) {
        throw IoError(std::string("inconsistent model JSON: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ModelDocument& doc) {
    write_file(path, model_to_json(doc));
}

ModelDocument load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::string file_checksum(const std::filesystem::path& path) { return fnv1a64_hex(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    return s;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << contents;
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace btud
