// src/report.cc

// Copyright 2026  tdnnas contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tdnnas/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tdnnas {

std::vector<const RunRecord *> ReportOrder(const std::vector<RunRecord> &records) {
  if (records.empty()) throw std::invalid_argument("report: no run records");
  std::vector<const RunRecord *> rows;
  for (const RunRecord &r : records) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RunRecord *a, const RunRecord *b) {
                     if (a->test.accuracy != b->test.accuracy) {
                       return a->test.accuracy > b->test.accuracy;
                     }
                     return a->id < b->id;
                   });
  return rows;
}

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return std::string(buf);
}

std::string CsvQuote(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string ReportCsv(const std::vector<RunRecord> &records) {
  std::ostringstream os;
  os << "# TDNNAS-REPORT1 1\n";
  os << "id,method,eta,architecture,heldout_accuracy,test_accuracy,params,"
        "wall_time_sec\n";
  for (const RunRecord *r : ReportOrder(records)) {
    os << CsvQuote(r->id) << "," << r->method << "," << Fixed(r->eta, 4) << ","
       << CsvQuote(r->spec_string) << "," << Fixed(r->heldout.accuracy, 4) << ","
       << Fixed(r->test.accuracy, 4) << "," << r->param_count << ","
       << Fixed(r->wall_time_sec, 2) << "\n";
  }
  return os.str();
}

std::string ReportMarkdown(const std::vector<RunRecord> &records) {
  std::ostringstream os;
  os << "# Run comparison (TDNNAS-REPORT1 1)\n\n";
  os << "| id | method | eta | architecture | held-out acc | test acc | #params | "
        "time (s) |\n";
  os << "|----|--------|-----|--------------|--------------|----------|---------|"
        "----------|\n";
  for (const RunRecord *r : ReportOrder(records)) {
    os << "| " << r->id << " | " << r->method << " | " << Fixed(r->eta, 4) << " | `"
       << r->spec_string << "` | " << Fixed(r->heldout.accuracy, 4) << " | "
       << Fixed(r->test.accuracy, 4) << " | " << r->param_count << " | "
       << Fixed(r->wall_time_sec, 2) << " |\n";
  }
  return os.str();
}

void WriteReport(const std::vector<RunRecord> &records, const std::string &csv_path,
                 const std::string &md_path) {
  {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + csv_path);
    out << ReportCsv(records);
  }
  {
    std::ofstream out(md_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + md_path);
    out << ReportMarkdown(records);
  }
}

}  // namespace tdnnas
