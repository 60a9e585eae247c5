#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace empa {

using SymbolTable = std::map<std::string, std::uint32_t, std::less<>>;

struct ListingLine {
  std::size_t line = 0;  // 1-based source line
  std::uint32_t addr = 0;
  std::vector<std::uint8_t> bytes;
  std::string source;
};

/// Assembled memory image; the contract between the assembler and the machine.
struct ObjectImage {
  std::vector<std::uint8_t> memory;
  std::uint32_t entry = 0;
  SymbolTable symbols;
  std::vector<ListingLine> listing;

  std::optional<std::uint32_t> symbol(std::string_view name) const;
};

struct AssembleOptions {
  std::size_t image_bytes = 4096;
};

/// Two-pass assembly of Y86 source extended with the Q meta-instructions.
/// Throws Error with SyntaxError, UndefinedLabel, DuplicateLabel,
/// UnmatchedQTermTarget, ImageOverflow or OverlappingPlacement; the error
/// carries the 1-based source line.
ObjectImage assemble(std::string_view source, const AssembleOptions& options = {});

/// `.yo`-style listing: one `0xADDR: BYTES | source` line per source line.
std::string write_listing(const ObjectImage& image);

/// Recovers the source column of a listing produced by write_listing.
std::string listing_source(std::string_view listing);

/// Flat memory image built from raw bytes (no symbols, entry 0).
ObjectImage image_from_bytes(std::vector<std::uint8_t> bytes);

}  // namespace empa
