#pragma once

#include "infobound/model.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace infobound::cli {

using nlohmann::json;

/// %.17g; non-finite values become null.
std::string format_json_number(double value);
/// %.12g, with NaN and Infinity spelled out.
std::string format_csv_number(double value);

/// Serializes with every floating value at 17 significant digits; object keys
/// keep insertion order of nlohmann::ordered_json or sorted order of json.
void write_json(std::ostream& out, const json& doc, int indent = 2);
std::string dump_json(const json& doc, int indent = 2);

json to_json(const Vector& v);
json to_json(const Matrix& m);

/// One line of the bounds table. An empty theta entry prints as "prior_averaged".
struct BoundsRow {
    std::vector<std::optional<double>> theta;
    std::string bound_kind;
    int entry_i = 1;
    int entry_j = 1;
    double value = 0.0;
};

struct BoundsTable {
    std::size_t dim = 1;
    std::vector<BoundsRow> rows;
};

void write_bounds_csv(std::ostream& out, const BoundsTable& table);
BoundsTable read_bounds_csv(std::istream& in);
json bounds_to_json(const BoundsTable& table);

struct SweepRow {
    double snr = 0.0;
    double eps_out = 0.0;
    double crlb = 0.0;
    double barankin = 0.0;
    double mc_mse = 0.0;
    double mc_ci = 0.0;
};

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace infobound::cli
