// prosody/embedding_io.h

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

#ifndef PROSODY_EMBEDDING_IO_H_
#define PROSODY_EMBEDDING_IO_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "prosody/gaussian.h"

namespace prosody {

/// Magic bytes of the binary embedding format.
inline constexpr char kBinaryEmbeddingMagic[4] = {'P', 'T', 'E', '1'};

/// Reads embeddings in either format, chosen by sniffing the first four
/// bytes. Checks that all vectors share one dimension, all components are
/// finite and token ids are unique.
std::vector<ProsodySample> ReadEmbeddings(std::istream &is);

/// JSON lines: {"token_id", "word", "embedding": [float]}.
std::vector<ProsodySample> ReadEmbeddingsJsonl(std::istream &is);
void WriteEmbeddingsJsonl(std::ostream &os, std::span<const ProsodySample> samples);

/// "PTE1", u32 d, then per record: u16 word length, word bytes, u16 token id
/// length, token id bytes, d x f32. All integers and floats little-endian.
std::vector<ProsodySample> ReadEmbeddingsBinary(std::istream &is);
void WriteEmbeddingsBinary(std::ostream &os, std::span<const ProsodySample> samples);

/// Throws if dimensions differ, a component is not finite, or a token id
/// repeats.
void ValidateSamples(std::span<const ProsodySample> samples);

}  // namespace prosody

#endif  // PROSODY_EMBEDDING_IO_H_
