#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speechgrade/errors.hpp"

namespace speechgrade {

enum class SourceKind { Real, SyntheticAligned, SyntheticUnaligned };

std::string to_token(SourceKind kind);             // "real" / "synth_aligned" / ...
SourceKind source_kind_from_token(const std::string& token);

struct CorpusRecord {
  std::string utt_id;
  SourceKind source = SourceKind::Real;
  std::string audio_path;
  std::string transcript;      // whitespace-tokenized words, UTF-8
  std::string aligned_ref_id;  // empty unless SyntheticAligned
};

struct AudioClip {
  std::vector<double> samples;  // in [-1, 1)
  int sample_rate_hz = 0;
};

// Which static scores a record gets, per source kind: Real pins both to 1,
// SyntheticUnaligned pins both to 0, SyntheticAligned computes both.
struct AvailabilityMask {
  bool has_sim = false;
  bool has_wer = false;
  std::optional<double> fixed_sim;
  std::optional<double> fixed_wer;
};

// Manifest: UTF-8 TSV, header `utt_id\tsource\taudio_path\ttranscript\t
// aligned_ref_id`, exactly five fields per row. Alignments may reference
// records defined later in the file; the target must be a Real record.
std::vector<CorpusRecord> load_manifest(const std::string& path);
std::vector<CorpusRecord> parse_manifest(const std::string& content);
void write_manifest(const std::vector<CorpusRecord>& records, const std::string& path);
std::string format_manifest(const std::vector<CorpusRecord>& records);

// RIFF/WAVE reader restricted to 16 kHz / 16-bit / mono PCM; unknown chunks
// are skipped. Samples are int16 / 32768.
AudioClip decode_wav(const std::string& path);
AudioClip decode_wav_bytes(const std::vector<std::uint8_t>& bytes, const std::string& name);
void write_wav(const AudioClip& clip, const std::string& path);

AvailabilityMask availability_mask(const CorpusRecord& record);

}  // namespace speechgrade
