#include "gvacl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace gvacl {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, int line_no, const char* what) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": bad " + what +
                        " value '" + s + "'");
    }
    if (pos != s.size())
        throw DataError("line " + std::to_string(line_no) + ": bad " + what +
                        " value '" + s + "'");
    return v;
}

int parse_id(const std::string& s, int line_no, const char* what) {
    const double v = parse_double(s, line_no, what);
    const int id = static_cast<int>(v);
    if (v != id || id < 1)
        throw DataError("line " + std::to_string(line_no) + ": " + what +
                        " id must be a positive integer, got '" + s + "'");
    return id;
}

}  // namespace

void write_csv(std::ostream& out, const Dataset& data) {
    out << "row,col,y";
    for (int k = 1; k <= data.p; ++k) out << ",x" << k;
    out << "\n";
    for (int i = 0; i < data.m; ++i) {
        for (int j = 0; j < data.n; ++j) {
            out << (i + 1) << ',' << (j + 1) << ',' << fmt17(data.yat(i, j));
            const double* x = data.xat(i, j);
            for (int k = 0; k < data.p; ++k) out << ',' << fmt17(x[k]);
            out << "\n";
        }
    }
}

void write_csv_file(const std::string& path, const Dataset& data) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    write_csv(f, data);
    if (!f) throw DataError("write to '" + path + "' failed");
}

Dataset read_csv(std::istream& in, const Family& family) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV input");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "row" || header[1] != "col" ||
        header[2] != "y")
        throw DataError("line 1: header must start with 'row,col,y'");
    const int p = static_cast<int>(header.size()) - 3;
    for (int k = 0; k < p; ++k)
        if (header[3 + k] != "x" + std::to_string(k + 1))
            throw DataError("line 1: covariate columns must be named x1..x" +
                            std::to_string(p));

    struct Record {
        int row, col, line_no;
        double y;
        std::vector<double> x;
    };
    std::vector<Record> records;
    int line_no = 1;
    int max_row = 0, max_col = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 3 + p)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(3 + p) + " fields, got " +
                            std::to_string(fields.size()));
        Record rec;
        rec.line_no = line_no;
        rec.row = parse_id(fields[0], line_no, "row");
        rec.col = parse_id(fields[1], line_no, "col");
        rec.y = parse_double(fields[2], line_no, "y");
        rec.x.resize(p);
        for (int k = 0; k < p; ++k)
            rec.x[k] = parse_double(fields[3 + k], line_no, "covariate");
        max_row = std::max(max_row, rec.row);
        max_col = std::max(max_col, rec.col);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("CSV contains no data records");

    Dataset data;
    data.m = max_row;
    data.n = max_col;
    data.p = p;
    data.family = family;
    const size_t cells = static_cast<size_t>(max_row) * max_col;
    data.y.assign(cells, 0.0);
    data.x.assign(cells * p, 0.0);
    std::vector<int> seen(cells, 0);
    for (const auto& rec : records) {
        const size_t idx = static_cast<size_t>(rec.row - 1) * max_col + (rec.col - 1);
        if (seen[idx])
            throw DataError("line " + std::to_string(rec.line_no) +
                            ": duplicate cell (row " + std::to_string(rec.row) +
                            ", col " + std::to_string(rec.col) + ")");
        seen[idx] = 1;
        data.y[idx] = rec.y;
        for (int k = 0; k < p; ++k) data.x[idx * p + k] = rec.x[k];
    }
    for (size_t idx = 0; idx < cells; ++idx)
        if (!seen[idx])
            throw DataError("missing cell (row " +
                            std::to_string(idx / max_col + 1) + ", col " +
                            std::to_string(idx % max_col + 1) +
                            "): the grid must be complete");
    data.validate();
    return data;
}

Dataset read_csv_file(const std::string& path, const Family& family) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    return read_csv(f, family);
}

}  // namespace gvacl
