#include "infobound/cli/json_io.hpp"

#include "infobound/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace infobound::cli {

namespace {

std::string format_with(const char* fmt, double value) {
    if (std::isnan(value)) return "NaN";
    if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, value);
    return buf;
}

void write_value(std::ostream& out, const json& v, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out << "{}";
                return;
            }
            out << '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out << ',';
                first = false;
                newline(depth + 1);
                out << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
                write_value(out, it.value(), indent, depth + 1);
            }
            newline(depth);
            out << '}';
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out << "[]";
                return;
            }
            // numeric rows stay on one line
            bool flat = true;
            for (const auto& e : v)
                if (e.is_structured()) flat = false;
            out << '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) out << (flat && indent >= 0 ? ", " : ",");
                first = false;
                if (!flat) newline(depth + 1);
                write_value(out, e, indent, depth + 1);
            }
            if (!flat) newline(depth);
            out << ']';
            return;
        }
        case json::value_t::number_float:
            out << format_json_number(v.get<double>());
            return;
        default:
            out << v.dump();
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& text) {
    if (text == "NaN") return std::nan("");
    if (text == "Infinity") return INFINITY;
    if (text == "-Infinity") return -INFINITY;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty())
        throw Error(ErrorKind::InvalidArgument, "bad number in csv: '" + text + "'");
    return v;
}

}  // namespace

std::string format_json_number(double value) {
    if (!std::isfinite(value)) return "null";
    return format_with("%.17g", value);
}

std::string format_csv_number(double value) { return format_with("%.12g", value); }

void write_json(std::ostream& out, const json& doc, int indent) {
    write_value(out, doc, indent, 0);
    out << '\n';
}

std::string dump_json(const json& doc, int indent) {
    std::ostringstream ss;
    write_json(ss, doc, indent);
    return ss.str();
}

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

void write_bounds_csv(std::ostream& out, const BoundsTable& table) {
    for (std::size_t i = 0; i < table.dim; ++i) out << "theta_" << i + 1 << ',';
    out << "bound_kind,entry_i,entry_j,value\n";
    for (const auto& row : table.rows) {
        if (row.theta.size() != table.dim)
            throw Error(ErrorKind::DimensionMismatch, "bounds row has wrong theta length");
        for (const auto& t : row.theta) out << (t ? format_csv_number(*t) : "prior_averaged") << ',';
        out << row.bound_kind << ',' << row.entry_i << ',' << row.entry_j << ','
            << format_csv_number(row.value) << '\n';
    }
}

BoundsTable read_bounds_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "empty bounds csv");
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header[header.size() - 4] != "bound_kind")
        throw Error(ErrorKind::InvalidArgument, "unexpected bounds csv header");
    BoundsTable table;
    table.dim = header.size() - 4;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::InvalidArgument, "bounds csv row has " + std::to_string(cells.size()) + " cells");
        BoundsRow row;
        for (std::size_t i = 0; i < table.dim; ++i) {
            if (cells[i] == "prior_averaged")
                row.theta.emplace_back();
            else
                row.theta.emplace_back(parse_number(cells[i]));
        }
        row.bound_kind = cells[table.dim];
        row.entry_i = static_cast<int>(parse_number(cells[table.dim + 1]));
        row.entry_j = static_cast<int>(parse_number(cells[table.dim + 2]));
        row.value = parse_number(cells[table.dim + 3]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

json bounds_to_json(const BoundsTable& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json theta = json::array();
        for (const auto& t : row.theta) theta.push_back(t ? json(*t) : json("prior_averaged"));
        rows.push_back({{"theta", theta},
                        {"bound_kind", row.bound_kind},
                        {"entry_i", row.entry_i},
                        {"entry_j", row.entry_j},
                        {"value", row.value}});
    }
    return json{{"dim", table.dim}, {"rows", rows}};
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "snr,eps_out,crlb,barankin,mc_mse,mc_ci\n";
    for (const auto& r : rows) {
        out << format_csv_number(r.snr) << ',' << format_csv_number(r.eps_out) << ','
            << format_csv_number(r.crlb) << ',' << format_csv_number(r.barankin) << ','
            << format_csv_number(r.mc_mse) << ',' << format_csv_number(r.mc_ci) << '\n';
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "snr,eps_out,crlb,barankin,mc_mse,mc_ci")
        throw Error(ErrorKind::InvalidArgument, "unexpected sweep csv header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 6) throw Error(ErrorKind::InvalidArgument, "sweep csv row needs 6 cells");
        rows.push_back({parse_number(c[0]), parse_number(c[1]), parse_number(c[2]), parse_number(c[3]),
                        parse_number(c[4]), parse_number(c[5])});
    }
    return rows;
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"snr", r.snr},
                       {"eps_out", r.eps_out},
                       {"crlb", r.crlb},
                       {"barankin", r.barankin},
                       {"mc_mse", r.mc_mse},
                       {"mc_ci", r.mc_ci}});
    return out;
}

}  // namespace infobound::cli
