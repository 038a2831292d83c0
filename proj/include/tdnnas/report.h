// tdnnas/report.h

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

#ifndef TDNNAS_REPORT_H_
#define TDNNAS_REPORT_H_

#include <string>
#include <vector>

#include "tdnnas/run-record.h"

namespace tdnnas {

// Comparison table over run records, best test accuracy first (ties keep a
// stable order by run id).  Returns rows in report order.
std::vector<const RunRecord *> ReportOrder(const std::vector<RunRecord> &records);

std::string ReportCsv(const std::vector<RunRecord> &records);
std::string ReportMarkdown(const std::vector<RunRecord> &records);

void WriteReport(const std::vector<RunRecord> &records, const std::string &csv_path,
                 const std::string &md_path);

}  // namespace tdnnas

#endif  // TDNNAS_REPORT_H_
