#include "newsgraph/data/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "newsgraph/data/csv.hpp"
#include "newsgraph/errors.hpp"

namespace newsgraph::data {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

void expect_fields(const CsvRecord& record, std::size_t count, const std::string& file) {
  if (record.fields.size() != count) {
    throw DataError(file, record.line, "record",
                    "expected " + std::to_string(count) + " fields, got " +
                        std::to_string(record.fields.size()));
  }
}

Date parse_date_field(const std::string& text, const std::string& file, std::size_t line) {
  try {
    return parse_date(text);
  } catch (const DataError& e) {
    throw DataError(file, line, "date", e.what());
  }
}

bool valid_symbol(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
  });
}

// Files are written one record per physical line.
std::string single_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

}  // namespace

Screener::Screener(std::vector<ScreenerEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.symbol < b.symbol; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!valid_symbol(e.symbol)) throw DataError("screener: invalid symbol '" + e.symbol + "'");
    if (e.name.empty()) throw DataError("screener: empty name for '" + e.symbol + "'");
    if (!by_symbol_.emplace(e.symbol, i).second) {
      throw DataError("screener: duplicate symbol '" + e.symbol + "'");
    }
  }
}

const ScreenerEntry* Screener::find(const std::string& symbol) const {
  const auto it = by_symbol_.find(symbol);
  return it == by_symbol_.end() ? nullptr : &entries_[it->second];
}

Screener read_screener(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  CsvReader reader(in, file);
  expect_header(reader, {"symbol", "name", "industry"});
  std::vector<ScreenerEntry> entries;
  std::set<std::string> seen;
  CsvRecord rec;
  while (reader.next(rec)) {
    expect_fields(rec, 3, file);
    ScreenerEntry e{rec.fields[0], rec.fields[1], rec.fields[2]};
    if (!valid_symbol(e.symbol)) throw DataError(file, rec.line, "symbol", "invalid symbol '" + e.symbol + "'");
    if (e.name.empty()) throw DataError(file, rec.line, "name", "empty company name");
    if (!seen.insert(e.symbol).second) throw DataError(file, rec.line, "symbol", "duplicate symbol '" + e.symbol + "'");
    entries.push_back(std::move(e));
  }
  return Screener(std::move(entries));
}

void write_screener(const std::filesystem::path& path, const Screener& screener) {
  auto out = open_output(path);
  out << "symbol,name,industry\n";
  for (const auto& e : screener.entries()) {
    out << csv_join({e.symbol, single_line(e.name), single_line(e.industry)}) << '\n';
  }
}

std::vector<PriceSeries> read_prices(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  CsvReader reader(in, file);
  expect_header(reader, {"date", "symbol", "open", "high", "low", "close", "volume"});
  std::map<std::string, PriceSeries> by_symbol;
  CsvRecord rec;
  while (reader.next(rec)) {
    expect_fields(rec, 7, file);
    PriceBar bar;
    bar.date = parse_date_field(rec.fields[0], file, rec.line);
    const std::string& symbol = rec.fields[1];
    if (!valid_symbol(symbol)) throw DataError(file, rec.line, "symbol", "invalid symbol '" + symbol + "'");
    bar.open = parse_double(rec.fields[2], file, rec.line, "open");
    bar.high = parse_double(rec.fields[3], file, rec.line, "high");
    bar.low = parse_double(rec.fields[4], file, rec.line, "low");
    bar.close = parse_double(rec.fields[5], file, rec.line, "close");
    bar.volume = parse_double(rec.fields[6], file, rec.line, "volume");
    if (!(bar.close > 0.0)) throw DataError(file, rec.line, "close", "close must be positive");
    auto& series = by_symbol[symbol];
    series.symbol = symbol;
    if (!series.bars.empty() && !(series.bars.back().date < bar.date)) {
      throw DataError(file, rec.line, "date",
                      "dates for " + symbol + " must be strictly increasing (" +
                          format_date(series.bars.back().date) + " then " + rec.fields[0] + ")");
    }
    series.bars.push_back(bar);
  }
  std::vector<PriceSeries> result;
  for (auto& [symbol, series] : by_symbol) result.push_back(std::move(series));
  return result;
}

void write_prices(const std::filesystem::path& path, const std::vector<PriceSeries>& series) {
  auto out = open_output(path);
  out << "date,symbol,open,high,low,close,volume\n";
  for (const auto& s : series) {
    for (const auto& bar : s.bars) {
      out << format_date(bar.date) << ',' << s.symbol << ',' << format_double(bar.open) << ','
          << format_double(bar.high) << ',' << format_double(bar.low) << ','
          << format_double(bar.close) << ',' << format_double(bar.volume) << '\n';
    }
  }
}

std::vector<Article> read_news(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  CsvReader reader(in, file);
  expect_header(reader, {"id", "date", "title", "content", "main_symbol", "mentioned_symbols"});
  std::vector<Article> articles;
  std::set<std::string> ids;
  CsvRecord rec;
  while (reader.next(rec)) {
    expect_fields(rec, 6, file);
    Article a;
    a.id = rec.fields[0];
    if (a.id.empty() || a.id.find('#') != std::string::npos) {
      throw DataError(file, rec.line, "id", "article id must be non-empty and free of '#'");
    }
    if (!ids.insert(a.id).second) throw DataError(file, rec.line, "id", "duplicate article id '" + a.id + "'");
    a.date = parse_date_field(rec.fields[1], file, rec.line);
    a.title = rec.fields[2];
    a.content = rec.fields[3];
    a.main_symbol = rec.fields[4];
    const std::string& mentioned = rec.fields[5];
    std::size_t start = 0;
    while (start < mentioned.size()) {
      const std::size_t end = std::min(mentioned.find(';', start), mentioned.size());
      std::string symbol = mentioned.substr(start, end - start);
      if (symbol.empty()) throw DataError(file, rec.line, "mentioned_symbols", "empty symbol in list");
      a.mentioned_symbols.push_back(std::move(symbol));
      start = end + 1;
    }
    if (!a.main_symbol.empty() &&
        std::find(a.mentioned_symbols.begin(), a.mentioned_symbols.end(), a.main_symbol) !=
            a.mentioned_symbols.end()) {
      throw DataError(file, rec.line, "mentioned_symbols", "main symbol repeated among mentioned symbols");
    }
    articles.push_back(std::move(a));
  }
  return articles;
}

void write_news(const std::filesystem::path& path, const std::vector<Article>& articles) {
  auto out = open_output(path);
  out << "id,date,title,content,main_symbol,mentioned_symbols\n";
  for (const auto& a : articles) {
    std::string mentioned;
    for (std::size_t i = 0; i < a.mentioned_symbols.size(); ++i) {
      if (i > 0) mentioned.push_back(';');
      mentioned += a.mentioned_symbols[i];
    }
    out << csv_join({a.id, format_date(a.date), single_line(a.title), single_line(a.content),
                     a.main_symbol, mentioned})
        << '\n';
  }
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  CsvReader reader(in, file);
  std::vector<EmbeddingRecord> records;
  CsvRecord rec;
  while (reader.next(rec)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
    if (rec.fields.size() < 3) throw DataError(file, rec.line, "record", "expected id,dim,values...");
    EmbeddingRecord r;
    r.id = rec.fields[0];
    r.line = rec.line;
    if (r.id.empty()) throw DataError(file, rec.line, "id", "empty id");
    const std::size_t dim = parse_size(rec.fields[1], file, rec.line, "dim");
    if (dim == 0 || rec.fields.size() != dim + 2) {
      throw DataError(file, rec.line, "dim",
                      "declared dim " + std::to_string(dim) + " but " +
                          std::to_string(rec.fields.size() - 2) + " values present");
    }
    r.values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      r.values.push_back(parse_double(rec.fields[i + 2], file, rec.line, "value" + std::to_string(i + 1)));
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingRecord>& records) {
  auto out = open_output(path);
  for (const auto& r : records) {
    out << csv_escape(r.id) << ',' << r.values.size();
    for (double v : r.values) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace newsgraph::data
