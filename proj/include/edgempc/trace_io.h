#ifndef EDGEMPC_TRACE_IO_H_
#define EDGEMPC_TRACE_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "edgempc/runtime.h"

namespace edgempc {

inline constexpr int kTraceSchemaVersion = 1;

// Column names of trace.csv, in order.
const std::vector<std::string>& TraceColumns();

// One header line plus one row per record. Doubles use the shortest
// round-trip representation, so ReadTraceCsv recovers every field exactly.
void WriteTraceCsv(std::ostream& out, const std::vector<CycleRecord>& records);
// Throws std::runtime_error with the offending line number.
std::vector<CycleRecord> ReadTraceCsv(std::istream& in);

// Whitespace-separated plot files.
void WriteTrajectoryDat(std::ostream& out, const std::vector<CycleRecord>& records);
void WriteDelaysDat(std::ostream& out, const std::vector<CycleRecord>& records);
void WriteErrorDat(std::ostream& out, const std::vector<CycleRecord>& records);

// Means in the order robot->edge, execution, edge->robot, round trip.
std::string FormatSummary(const EpisodeSummary& summary);

}  // namespace edgempc

#endif  // EDGEMPC_TRACE_IO_H_
