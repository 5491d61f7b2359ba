#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/errors.hpp"
#include "arcas/mm_io.hpp"

namespace arcas {

inline void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << "k,norm_y,norm_residual,chi,selected,step_kind\n";
  const long total = static_cast<long>(trace.entries.size());
  for (long i = 0; i < total; ++i) {
    // a norms-level trace is dense in k; a none-level trace keeps only the
    // terminal entry, which sits at k = iterations
    const long k = (i + 1 == total && total != trace.iterations + 1)
                       ? trace.iterations
                       : i;
    const auto& e = trace.entries[static_cast<std::size_t>(i)];
    out << k << "," << format_double(e.norm_y) << ","
        << format_double(e.norm_residual) << "," << e.chi << "," << e.selected
        << "," << e.step_kind << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const SolveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
}

// Reads the norm-level columns back; direction snapshots and terminal status
// do not round-trip through CSV.
inline SolveTrace read_trace_csv(std::istream& in,
                                 const std::string& name = "<trace>") {
  SolveTrace trace;
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw FormatError(name, 1, "empty trace");
  ++lineno;
  if (line != "k,norm_y,norm_residual,chi,selected,step_kind")
    throw FormatError(name, 1, "unexpected header '" + line + "'");
  long last_k = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError(name, lineno, "expected 6 columns");
    TraceEntry e;
    long k = 0;
    try {
      k = std::stol(cells[0]);
      e.norm_y = std::stod(cells[1]);
      e.norm_residual = std::stod(cells[2]);
      e.chi = std::stoi(cells[3]);
      e.selected = std::stol(cells[4]);
    } catch (const std::exception&) {
      throw FormatError(name, lineno, "bad numeric cell");
    }
    if (k <= last_k) throw FormatError(name, lineno, "k column must increase");
    last_k = k;
    e.step_kind = cells[5];
    trace.entries.push_back(std::move(e));
  }
  if (trace.entries.empty()) throw FormatError(name, lineno, "no data rows");
  if (trace.entries.back().step_kind != "none")
    throw FormatError(name, lineno, "trace does not end with a terminal row");
  trace.iterations = last_k;
  trace.level = trace.entries.size() == 1 ? TraceLevel::none : TraceLevel::norms;
  const auto& first_step = trace.entries.front().step_kind;
  trace.mode = first_step == "column" ? Mode::column_action : Mode::row_action;
  return trace;
}

inline SolveTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trace_csv(in, path);
}

}  // namespace arcas
