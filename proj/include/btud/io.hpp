#pragma once

#include "btud/decomp.hpp"
#include "btud/select.hpp"
#include "btud/tensor.hpp"
#include "btud/tucker_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace btud {

/// Text formats
///
///   tensor: "T3 N M K" then N*M*K values in storage order (i fastest)
///   matrix: "M2 rows cols" then rows*cols values, row-major
///
/// Values are written with 17 significant digits so they read back bit-exactly.
void write_tensor(std::ostream& out, const Tensor3& t);
void write_matrix(std::ostream& out, const Matrix& a);
Tensor3 read_tensor(std::istream& in);
Matrix read_matrix(std::istream& in);

/// Either format, dispatched on the header tag.
using DataArray = std::variant<Tensor3, Matrix>;
DataArray read_data(std::istream& in);

void save_data(const std::filesystem::path& path, const DataArray& data);
DataArray load_data(const std::filesystem::path& path);

/// One-column CSV with header "truth" and 0/1 rows.
void save_truth(const std::filesystem::path& path, const std::vector<bool>& truth);
std::vector<bool> load_truth(const std::filesystem::path& path);

/// CSV columns feature_index (1-based), statistic, p_raw, p_adjusted, selected (0/1).
void write_selection_csv(std::ostream& out, const SelectionResult& r);
void save_selection(const std::filesystem::path& path, const SelectionResult& r);
/// Reads back statistic, p-values and mask; dof and threshold are not stored in the CSV.
SelectionResult load_selection(const std::filesystem::path& path);

/// Everything the decompose step produces.
struct ModelDocument {
    TuckerModel model;
    double alpha = 0.0;
    double beta = 1.0;
    std::string solver;
    FitReport report;
    std::optional<SelfConsistency> consistency;
};

std::string model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const ModelDocument& doc);
ModelDocument load_model(const std::filesystem::path& path);

/// 17-significant-digit decimal, as used by every writer here.
std::string format_number(double v);

/// FNV-1a 64-bit hash of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_checksum(const std::filesystem::path& path);

/// Whole-file helpers; both throw IoError on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace btud
