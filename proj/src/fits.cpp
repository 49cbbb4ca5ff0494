#include "voxcover/fits.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace voxcover {

namespace {

constexpr std::size_t kBlock = 2880;
constexpr std::size_t kCard = 80;
constexpr std::size_t kCardsPerBlock = kBlock / kCard;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// A header card split into keyword and raw value text (comment stripped).
struct Card {
  std::string keyword;
  std::string value;
  std::string text;
};

Card parse_card(const char* raw) {
  Card c;
  c.text = std::string(raw, kCard);
  c.keyword = trim(c.text.substr(0, 8));
  if (c.text.size() >= 10 && c.text[8] == '=' && c.text[9] == ' ') {
    std::string v = c.text.substr(10);
    const std::size_t slash = v.find('/');
    if (slash != std::string::npos) v = v.substr(0, slash);
    c.value = trim(v);
  }
  return c;
}

[[noreturn]] void bad_card(const Card& c, const std::string& why) {
  throw FormatError("malformed FITS card (" + why + "): '" + trim(c.text) +
                    "'");
}

long long card_int(const Card& c) {
  const std::string& v = c.value;
  if (v.empty()) bad_card(c, "missing integer value");
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    bad_card(c, "not an integer");
  }
  if (pos != v.size()) bad_card(c, "not an integer");
  return out;
}

double card_double(const Card& c) {
  const std::string& v = c.value;
  if (v.empty()) bad_card(c, "missing numeric value");
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_card(c, "not a number");
  }
  if (pos != v.size()) bad_card(c, "not a number");
  return out;
}

// Fixed-format card: keyword padded to 8, "= ", value right-justified in a
// 20-char field, padded to 80 with spaces.
void append_card(std::string& header, const std::string& keyword,
                 const std::string& value) {
  std::string card = keyword;
  card.resize(8, ' ');
  card += "= ";
  std::string field = value;
  if (field.size() < 20) field.insert(0, 20 - field.size(), ' ');
  card += field;
  card.resize(kCard, ' ');
  header += card;
}

void append_end(std::string& header) {
  std::string card = "END";
  card.resize(kCard, ' ');
  header += card;
}

std::string make_header(int bitpix, const Dims& d) {
  std::string h;
  append_card(h, "SIMPLE", "T");
  append_card(h, "BITPIX", std::to_string(bitpix));
  append_card(h, "NAXIS", "3");
  append_card(h, "NAXIS1", std::to_string(d.nx));
  append_card(h, "NAXIS2", std::to_string(d.ny));
  append_card(h, "NAXIS3", std::to_string(d.nz));
  append_end(h);
  while (h.size() % kBlock != 0) h += ' ';
  return h;
}

void write_padded(std::ofstream& out, const std::vector<unsigned char>& data,
                  const std::string& path) {
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  const std::size_t rem = data.size() % kBlock;
  if (rem != 0) {
    const std::string pad(kBlock - rem, '\0');
    out.write(pad.data(), static_cast<std::streamsize>(pad.size()));
  }
  if (!out) throw IoError("failed to write FITS data to '" + path + "'");
}

struct ParsedHeader {
  int bitpix = 0;
  Dims dims;
  double bscale = 1.0;
  double bzero = 0.0;
  std::size_t blocks = 0;
};

ParsedHeader read_header(std::ifstream& in, const std::string& path) {
  ParsedHeader h;
  bool saw_simple = false, saw_bitpix = false, saw_naxis = false;
  bool saw_n1 = false, saw_n2 = false, saw_n3 = false;
  long long naxis = -1, n1 = 0, n2 = 0, n3 = 0;
  bool done = false;
  char block[kBlock];

  // FITS limits a header to far fewer blocks than this; the cap only guards
  // against scanning a huge non-FITS file for an END card that never comes.
  constexpr std::size_t kMaxHeaderBlocks = 1024;
  while (!done) {
    if (h.blocks >= kMaxHeaderBlocks)
      throw FormatError("no END card within the first " +
                        std::to_string(kMaxHeaderBlocks) +
                        " header blocks of '" + path + "'");
    in.read(block, kBlock);
    if (in.gcount() != static_cast<std::streamsize>(kBlock))
      throw FormatError("truncated FITS header in '" + path + "'");
    ++h.blocks;
    for (std::size_t i = 0; i < kCardsPerBlock; ++i) {
      const Card c = parse_card(block + i * kCard);
      if (h.blocks == 1 && i == 0 && c.keyword != "SIMPLE")
        throw FormatError("first card of '" + path +
                          "' is not SIMPLE: '" + trim(c.text) + "'");
      if (c.keyword == "END") {
        done = true;
        break;
      } else if (c.keyword == "SIMPLE") {
        if (c.value != "T") {
          if (c.value == "F")
            throw UnsupportedError("non-conforming FITS (SIMPLE=F) in '" +
                                   path + "'");
          bad_card(c, "SIMPLE must be T");
        }
        saw_simple = true;
      } else if (c.keyword == "BITPIX") {
        h.bitpix = static_cast<int>(card_int(c));
        saw_bitpix = true;
      } else if (c.keyword == "NAXIS") {
        naxis = card_int(c);
        saw_naxis = true;
      } else if (c.keyword == "NAXIS1") {
        n1 = card_int(c);
        saw_n1 = true;
      } else if (c.keyword == "NAXIS2") {
        n2 = card_int(c);
        saw_n2 = true;
      } else if (c.keyword == "NAXIS3") {
        n3 = card_int(c);
        saw_n3 = true;
      } else if (c.keyword == "BSCALE") {
        h.bscale = card_double(c);
      } else if (c.keyword == "BZERO") {
        h.bzero = card_double(c);
      }
      // Any other keyword is ignored.
    }
  }

  if (!saw_simple) throw FormatError("missing SIMPLE card in '" + path + "'");
  if (!saw_bitpix) throw FormatError("missing BITPIX card in '" + path + "'");
  if (!saw_naxis) throw FormatError("missing NAXIS card in '" + path + "'");
  if (naxis != 3)
    throw DimensionError("'" + path + "' has NAXIS=" + std::to_string(naxis) +
                         "; only 3D volumes are supported");
  if (!saw_n1 || !saw_n2 || !saw_n3)
    throw FormatError("missing NAXIS1/NAXIS2/NAXIS3 card in '" + path + "'");
  if (n1 <= 0 || n2 <= 0 || n3 <= 0)
    throw FormatError("non-positive axis length in '" + path + "'");
  if (h.bitpix != 16 && h.bitpix != -32)
    throw UnsupportedError("BITPIX=" + std::to_string(h.bitpix) + " in '" +
                           path + "' is not supported (use 16 or -32)");
  h.dims = Dims{static_cast<std::size_t>(n1), static_cast<std::size_t>(n2),
                static_cast<std::size_t>(n3)};
  return h;
}

std::vector<double> read_data(std::ifstream& in, const ParsedHeader& h,
                              const std::string& path) {
  const std::size_t n = h.dims.count();
  const std::size_t bpp = (h.bitpix == 16) ? 2 : 4;
  std::vector<unsigned char> raw(n * bpp);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw FormatError("truncated FITS data in '" + path + "': expected " +
                      std::to_string(raw.size()) + " bytes");

  std::vector<double> out(n);
  if (h.bitpix == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint16_t u =
          static_cast<std::uint16_t>(raw[2 * i]) << 8 |
          static_cast<std::uint16_t>(raw[2 * i + 1]);
      out[i] = h.bzero + h.bscale * static_cast<double>(
                                         static_cast<std::int16_t>(u));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t u = (static_cast<std::uint32_t>(raw[4 * i]) << 24) |
                              (static_cast<std::uint32_t>(raw[4 * i + 1]) << 16) |
                              (static_cast<std::uint32_t>(raw[4 * i + 2]) << 8) |
                              static_cast<std::uint32_t>(raw[4 * i + 3]);
      out[i] = h.bzero + h.bscale * static_cast<double>(std::bit_cast<float>(u));
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(out[i]))
      throw FormatError("non-finite value at voxel " + std::to_string(i) +
                        " in '" + path + "'");
  return out;
}

std::ifstream open_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

} // namespace

Volume load_fits(const std::string& path) {
  std::ifstream in = open_read(path);
  const ParsedHeader h = read_header(in, path);
  const std::vector<double> values = read_data(in, h, path);
  Volume v(h.dims, ValueKind::Intensity);
  for (std::size_t i = 0; i < values.size(); ++i)
    v.data[i] = static_cast<float>(values[i]);
  // Scaled values may exceed float range even though each source sample fit.
  for (std::size_t i = 0; i < v.data.size(); ++i)
    if (!std::isfinite(v.data[i]))
      throw FormatError("value at voxel " + std::to_string(i) + " in '" +
                        path + "' does not fit a 32-bit float after scaling");
  return v;
}

void save_fits(const Volume& v, const std::string& path) {
  require_consistent(v, "save_fits");
  std::ofstream out = open_write(path);
  const std::string header = make_header(-32, v.dims);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<unsigned char> raw(v.data.size() * 4);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(v.data[i]);
    raw[4 * i] = static_cast<unsigned char>(u >> 24);
    raw[4 * i + 1] = static_cast<unsigned char>(u >> 16);
    raw[4 * i + 2] = static_cast<unsigned char>(u >> 8);
    raw[4 * i + 3] = static_cast<unsigned char>(u);
  }
  write_padded(out, raw, path);
}

void save_fits(const LabelVolume& lv, const std::string& path) {
  require_consistent(lv, "save_fits");
  if (lv.k > 32768)
    throw ValidationError("cannot save " + std::to_string(lv.k) +
                          " labels as 16-bit integers");
  std::ofstream out = open_write(path);
  const std::string header = make_header(16, lv.dims);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<unsigned char> raw(lv.labels.size() * 2);
  for (std::size_t i = 0; i < lv.labels.size(); ++i) {
    const std::uint16_t u =
        static_cast<std::uint16_t>(static_cast<std::int16_t>(lv.labels[i]));
    raw[2 * i] = static_cast<unsigned char>(u >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(u);
  }
  write_padded(out, raw, path);
}

LabelVolume load_label_fits(const std::string& path) {
  std::ifstream in = open_read(path);
  const ParsedHeader h = read_header(in, path);
  if (h.bitpix != 16)
    throw UnsupportedError("label volume '" + path +
                           "' must be BITPIX=16, got " +
                           std::to_string(h.bitpix));
  const std::vector<double> values = read_data(in, h, path);

  LabelVolume lv;
  lv.dims = h.dims;
  lv.labels.resize(values.size());
  std::int32_t max_label = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    const double r = std::round(x);
    if (r < 0.0 || std::abs(x - r) > 1e-9)
      throw FormatError("voxel " + std::to_string(i) + " of '" + path +
                        "' is not a nonnegative integer label");
    lv.labels[i] = static_cast<std::int32_t>(r);
    if (lv.labels[i] > max_label) max_label = lv.labels[i];
  }
  lv.k = static_cast<std::size_t>(max_label) + 1;
  lv.summary.assign(lv.k, ClusterSummary{});
  for (std::int32_t l : lv.labels) ++lv.summary[static_cast<std::size_t>(l)].count;
  return lv;
}

} // namespace voxcover
