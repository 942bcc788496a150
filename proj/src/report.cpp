#include "ubmlab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ubmlab {

bool Report::all_pass() const {
    for (const auto& row : rows) {
        if (row.verdict && row.verdict->kind != VerdictKind::Pass) return false;
    }
    return true;
}

ReportRow& Report::add_row(std::string label) {
    rows.push_back(ReportRow{std::move(label), {}, std::nullopt});
    return rows.back();
}

ReportRow estimate_row(std::string label, const Estimate& e) {
    ReportRow row{std::move(label), {}, e.verdict};
    row.values["empirical"] = e.value;
    row.values["stderr"] = e.stderr_;
    row.values["n_samples"] = static_cast<double>(e.n_samples);
    if (e.prediction) row.values["predicted"] = *e.prediction;
    if (e.effective_sample_size) row.values["ess"] = *e.effective_sample_size;
    return row;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

namespace {

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("report: malformed number '" + s + "'");
    return v;
}

VerdictKind parse_verdict(const std::string& s) {
    if (s == "pass") return VerdictKind::Pass;
    if (s == "fail") return VerdictKind::Fail;
    if (s == "flag") return VerdictKind::Flag;
    throw std::invalid_argument("report: unknown verdict '" + s + "'");
}

// JSON has no inf/nan; those go through as strings.
nlohmann::json number_to_json(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_double(j.get<std::string>());
    return j.get<double>();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

nlohmann::json to_json(const Report& report) {
    nlohmann::json j;
    j["kind"] = report.kind;
    j["version"] = report.version;
    j["inputs"] = report.inputs;
    j["all_pass"] = report.all_pass();
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["label"] = row.label;
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [k, v] : row.values) values[k] = number_to_json(v);
        r["values"] = values;
        if (row.verdict) {
            r["verdict"] = to_string(row.verdict->kind);
            r["rule"] = row.verdict->rule;
        }
        rows.push_back(std::move(r));
    }
    return j;
}

Report report_from_json(const nlohmann::json& j) {
    Report report;
    report.kind = j.at("kind").get<std::string>();
    report.version = j.at("version").get<std::string>();
    report.inputs = j.value("inputs", nlohmann::json::object());
    for (const auto& r : j.at("rows")) {
        ReportRow row;
        row.label = r.at("label").get<std::string>();
        for (const auto& [k, v] : r.at("values").items()) row.values[k] = number_from_json(v);
        if (r.contains("verdict"))
            row.verdict = Verdict{parse_verdict(r.at("verdict").get<std::string>()), r.value("rule", std::string{})};
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_report_json(const Report& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    // dump() prints doubles round-trip exact
    out << to_json(report).dump(2) << '\n';
}

Report read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return report_from_json(nlohmann::json::parse(in));
}

void write_report_csv(const Report& report, std::ostream& out) {
    std::set<std::string> columns;
    for (const auto& row : report.rows)
        for (const auto& [k, v] : row.values) columns.insert(k);
    for (const auto& row : report.rows) {
        if (row.label.find(',') != std::string::npos || row.label.find('\n') != std::string::npos)
            throw std::invalid_argument("write_report_csv: labels may not contain commas or newlines");
    }
    out << "# kind=" << report.kind << " version=" << report.version << '\n';
    out << "label";
    for (const auto& c : columns) out << ',' << c;
    out << ",verdict,rule\n";
    for (const auto& row : report.rows) {
        out << row.label;
        for (const auto& c : columns) {
            out << ',';
            auto it = row.values.find(c);
            if (it != row.values.end()) out << format_double(it->second);
        }
        out << ',' << (row.verdict ? to_string(row.verdict->kind) : "") << ','
            << (row.verdict ? row.verdict->rule : "") << '\n';
    }
}

Report read_report_csv(std::istream& in) {
    Report report;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw std::invalid_argument("report csv: missing # header");
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        if (key == "kind") report.kind = tok.substr(eq + 1);
        if (key == "version") report.version = tok.substr(eq + 1);
    }
    if (!std::getline(in, line)) throw std::invalid_argument("report csv: missing column header");
    const auto header = split_csv(line);
    if (header.size() < 3 || header.front() != "label" || header[header.size() - 2] != "verdict" ||
        header.back() != "rule")
        throw std::invalid_argument("report csv: bad column header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) throw std::invalid_argument("report csv: ragged row");
        ReportRow row;
        row.label = cells.front();
        for (std::size_t c = 1; c + 2 < cells.size(); ++c) {
            if (!cells[c].empty()) row.values[header[c]] = parse_double(cells[c]);
        }
        const auto& v = cells[cells.size() - 2];
        if (!v.empty()) row.verdict = Verdict{parse_verdict(v), cells.back()};
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace ubmlab
