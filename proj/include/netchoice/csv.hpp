#ifndef NETCHOICE_CSV_HPP
#define NETCHOICE_CSV_HPP

#include <string>
#include <vector>

namespace netchoice::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Reads a UTF-8, comma-separated file with a header row. Quoted fields may
// contain commas, doubled quotes, and newlines. CRLF line endings accepted.
Table read_file(const std::string& path);

class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void write_row(const std::vector<std::string>& fields);

 private:
  struct Impl;
  Impl* impl_;
};

// Locale-independent conversions ("." decimal point, shortest round-trip).
std::string format_double(double value);
std::string format_int(long long value);
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

}  // namespace netchoice::csv

#endif  // NETCHOICE_CSV_HPP
