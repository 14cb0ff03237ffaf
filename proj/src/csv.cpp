#include "fir/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fir {

LabeledSet CsvData::as_labeled() const {
    if (!labels) throw std::runtime_error("CSV has no label column");
    return LabeledSet{features, *labels};
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
            cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

[[noreturn]] void fail_row(const std::string& path, int row, const std::string& what) {
    throw std::runtime_error(path + ": row " + std::to_string(row) + ": " + what);
}

}  // namespace

CsvData load_csv(const std::string& path, std::optional<int> classes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const std::vector<std::string> header = split_row(line);
    if (header.empty()) throw std::runtime_error(path + ": empty header");

    int label_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == "label") label_col = static_cast<int>(j);
    const int m = static_cast<int>(header.size()) - (label_col >= 0 ? 1 : 0);
    if (m < 1) throw std::runtime_error(path + ": no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            fail_row(path, row_no, "expected " + std::to_string(header.size()) +
                                       " cells, got " + std::to_string(cells.size()));
        std::vector<double> feat;
        feat.reserve(m);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(cells[j], &used);
            } catch (const std::exception&) {
                fail_row(path, row_no, "non-numeric cell '" + cells[j] + "'");
            }
            if (used != cells[j].size())
                fail_row(path, row_no, "non-numeric cell '" + cells[j] + "'");
            if (static_cast<int>(j) == label_col) {
                const int y = static_cast<int>(value);
                if (static_cast<double>(y) != value)
                    fail_row(path, row_no, "label must be an integer");
                if (y < 1 || (classes && y > *classes))
                    fail_row(path, row_no, "label " + std::to_string(y) +
                                               " outside 1.." +
                                               (classes ? std::to_string(*classes) : "c"));
                labels.push_back(y);
            } else {
                feat.push_back(value);
            }
        }
        rows.push_back(std::move(feat));
    }

    CsvData out;
    out.features.resize(static_cast<int>(rows.size()), m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < m; ++j) out.features(static_cast<int>(i), j) = rows[i][j];
    if (label_col >= 0) {
        VectorXi y(static_cast<int>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<int>(i)] = labels[i];
        out.labels = y;
    }
    return out;
}

void write_csv(const std::string& path, const MatrixXd& features, const VectorXi* labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (int j = 0; j < features.cols(); ++j) out << (j ? "," : "") << "f" << (j + 1);
    if (labels) out << ",label";
    out << "\n";
    char buf[64];
    for (int i = 0; i < features.rows(); ++i) {
        for (int j = 0; j < features.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", features(i, j));
            out << (j ? "," : "") << buf;
        }
        if (labels) out << "," << (*labels)[i];
        out << "\n";
    }
}

}  // namespace fir
