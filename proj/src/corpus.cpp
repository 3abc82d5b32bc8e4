#include "speechgrade/corpus.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace speechgrade {

namespace {

constexpr const char* kManifestHeader =
    "utt_id\tsource\taudio_path\ttranscript\taligned_ref_id";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string to_token(SourceKind kind) {
  switch (kind) {
    case SourceKind::Real: return "real";
    case SourceKind::SyntheticAligned: return "synth_aligned";
    case SourceKind::SyntheticUnaligned: return "synth_unaligned";
  }
  throw ValidationError("UnknownSource: invalid enum value");
}

SourceKind source_kind_from_token(const std::string& token) {
  if (token == "real") return SourceKind::Real;
  if (token == "synth_aligned") return SourceKind::SyntheticAligned;
  if (token == "synth_unaligned") return SourceKind::SyntheticUnaligned;
  throw ValidationError("UnknownSource: '" + token + "'");
}

std::vector<CorpusRecord> parse_manifest(const std::string& content) {
  std::vector<CorpusRecord> records;
  std::unordered_map<std::string, std::size_t> by_id;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kManifestHeader)
        throw ValidationError("MalformedLine(1): expected manifest header");
      saw_header = true;
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 5)
      throw ValidationError("MalformedLine(" + std::to_string(line_no) +
                            "): expected 5 tab-separated fields, got " +
                            std::to_string(fields.size()));
    CorpusRecord rec;
    rec.utt_id = fields[0];
    rec.source = source_kind_from_token(fields[1]);
    rec.audio_path = fields[2];
    rec.transcript = fields[3];
    rec.aligned_ref_id = fields[4];
    if (rec.utt_id.empty())
      throw ValidationError("MalformedLine(" + std::to_string(line_no) +
                            "): empty utt_id");
    if (rec.transcript.find('\t') != std::string::npos ||
        rec.transcript.find('\n') != std::string::npos)
      throw ValidationError("MalformedLine(" + std::to_string(line_no) +
                            "): transcript contains tab or newline");
    if (by_id.count(rec.utt_id))
      throw ValidationError("DuplicateId(" + rec.utt_id + ")");
    by_id.emplace(rec.utt_id, records.size());
    records.push_back(std::move(rec));
  }
  if (!saw_header)
    throw ValidationError("MalformedLine(1): missing manifest header");

  // Alignment invariants; forward references are allowed.
  for (const auto& rec : records) {
    if (rec.source == SourceKind::SyntheticAligned) {
      if (rec.aligned_ref_id.empty())
        throw ValidationError("DanglingAlignment(" + rec.utt_id +
                              "): synth_aligned record has empty aligned_ref_id");
      const auto it = by_id.find(rec.aligned_ref_id);
      if (it == by_id.end() || records[it->second].source != SourceKind::Real)
        throw ValidationError("DanglingAlignment(" + rec.utt_id +
                              "): aligned_ref_id '" + rec.aligned_ref_id +
                              "' does not name a Real record");
    } else if (!rec.aligned_ref_id.empty()) {
      throw ValidationError("DanglingAlignment(" + rec.utt_id + "): " +
                            to_token(rec.source) +
                            " record must have empty aligned_ref_id");
    }
  }
  return records;
}

std::vector<CorpusRecord> load_manifest(const std::string& path) {
  return parse_manifest(read_file(path));
}

std::string format_manifest(const std::vector<CorpusRecord>& records) {
  std::string out = kManifestHeader;
  out += '\n';
  for (const auto& rec : records) {
    out += rec.utt_id;
    out += '\t';
    out += to_token(rec.source);
    out += '\t';
    out += rec.audio_path;
    out += '\t';
    out += rec.transcript;
    out += '\t';
    out += rec.aligned_ref_id;
    out += '\n';
  }
  return out;
}

void write_manifest(const std::vector<CorpusRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << format_manifest(records);
}

namespace {

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t read_u16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] |
                                    (static_cast<std::uint16_t>(b[off + 1]) << 8));
}

}  // namespace

AudioClip decode_wav_bytes(const std::vector<std::uint8_t>& bytes,
                           const std::string& name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ValidationError("NotRiff: " + name);

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  AudioClip clip;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    char id[5] = {0};
    std::memcpy(id, bytes.data() + off, 4);
    const std::uint32_t size = read_u32(bytes, off + 4);
    off += 8;
    if (off + size > bytes.size())
      throw ValidationError("TruncatedData: chunk '" + std::string(id) +
                            "' exceeds file size in " + name);
    if (std::strcmp(id, "fmt ") == 0) {
      if (size < 16) throw ValidationError("TruncatedData: fmt chunk too small in " + name);
      format_tag = read_u16(bytes, off);
      channels = read_u16(bytes, off + 2);
      rate = read_u32(bytes, off + 4);
      bits = read_u16(bytes, off + 14);
      if (format_tag != 1 || bits != 16 || channels != 1)
        throw ValidationError("UnsupportedFormat(tag=" + std::to_string(format_tag) +
                              ", bits=" + std::to_string(bits) +
                              ", channels=" + std::to_string(channels) + "): " + name);
      if (rate != 16000)
        throw ValidationError("UnsupportedRate(" + std::to_string(rate) + "): " + name);
      have_fmt = true;
    } else if (std::strcmp(id, "data") == 0) {
      if (!have_fmt)
        throw ValidationError("TruncatedData: data chunk before fmt chunk in " + name);
      if (size % 2 != 0)
        throw ValidationError("TruncatedData: odd data chunk size in " + name);
      const std::size_t n = size / 2;
      if (n == 0)
        throw ValidationError("TruncatedData: empty data chunk in " + name);
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t v =
            static_cast<std::int16_t>(read_u16(bytes, off + 2 * i));
        clip.samples[i] = static_cast<double>(v) / 32768.0;
      }
      clip.sample_rate_hz = static_cast<int>(rate);
      return clip;
    }
    off += size + (size % 2);  // chunks are word-aligned
  }
  throw ValidationError("TruncatedData: no data chunk found in " + name);
}

AudioClip decode_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav_bytes(bytes, path);
}

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.samples.empty()) throw ValidationError("cannot write empty clip: " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write WAV file: " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_size = n * 2;
  const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate_hz);
  const std::uint32_t byte_rate = rate * 2;

  auto put_u32 = [&out](std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF),
                 static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
  };
  auto put_u16 = [&out](std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    out.write(b, 2);
  };

  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);   // PCM
  put_u16(1);   // mono
  put_u32(rate);
  put_u32(byte_rate);
  put_u16(2);   // block align
  put_u16(16);  // bits
  out.write("data", 4);
  put_u32(data_size);
  for (const double s : clip.samples) {
    double scaled = std::round(s * 32768.0);
    if (scaled > 32767.0) scaled = 32767.0;
    if (scaled < -32768.0) scaled = -32768.0;
    put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
}

AvailabilityMask availability_mask(const CorpusRecord& record) {
  AvailabilityMask mask;
  switch (record.source) {
    case SourceKind::Real:
      mask.fixed_sim = 1.0;
      mask.fixed_wer = 1.0;
      break;
    case SourceKind::SyntheticAligned:
      mask.has_sim = true;
      mask.has_wer = true;
      break;
    case SourceKind::SyntheticUnaligned:
      mask.fixed_sim = 0.0;
      mask.fixed_wer = 0.0;
      break;
  }
  return mask;
}

}  // namespace speechgrade
