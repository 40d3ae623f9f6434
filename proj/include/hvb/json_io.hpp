#ifndef HVB_JSON_IO_HPP
#define HVB_JSON_IO_HPP

#include <json.hpp>

#include <string>

#include "hvb/bundle.hpp"
#include "hvb/field.hpp"
#include "hvb/galois.hpp"
#include "hvb/isogeny.hpp"
#include "hvb/matrix.hpp"
#include "hvb/nilmod.hpp"

namespace hvb {

using Json = nlohmann::json;

// Every input file carries a schema version field "v".  parse_envelope
// rejects malformed JSON and unknown versions with input_error; the returned
// object still contains "v", which the typed parsers ignore.
inline constexpr int kSchemaVersion = 1;
Json parse_envelope(const std::string& text);

// Canonical serialization: sorted keys, two-space indent, trailing newline.
// Reparsing a dump yields an equal value.
std::string dump_canonical(const Json& j);

// What a file's payload describes, detected from its distinguishing key.
enum class PayloadKind { Module, Bundle, Isogeny, Level };
PayloadKind payload_kind(const Json& j);

// Field elements: rationals as JSON integers when they fit, else "a/b"
// strings in lowest terms with positive denominator; GF(p^m) residues as
// arrays of m coefficients, least degree first.
Json elem_to_json(const Field& f, const Elem& e);
Elem elem_from_json(const Field& f, const Json& j);

Json to_json(const FieldSpec& s);
FieldSpec field_spec_from_json(const Json& j);

Json matrix_to_json(const ExactMatrix& m);
ExactMatrix matrix_from_json(const Field& f, const Json& j);

// Typed parsers check shapes and value ranges; deeper semantic validation
// (commutation, closure, regime fit) stays with the validate functions and
// with make_bundle, so a structurally readable but mathematically broken
// object can still be loaded and reported on.
Json to_json(const NilModule& m);
NilModule nilmodule_from_json(const Json& j);

Json to_json(const GaloisModule& m);
GaloisModule galois_from_json(const Json& j);

Json to_json(const CharacterPoint& x);
CharacterPoint character_point_from_json(const Json& j);

Json to_json(const CharacterOrbit& o);
CharacterOrbit orbit_from_json(const Json& j);

Json to_json(const GroundContext& ctx);
GroundContext context_from_json(const Json& j);

// bundle_from_json returns the canonical validated form (via make_bundle)
Json to_json(const HomogBundle& e);
HomogBundle bundle_from_json(const Json& j);

Json to_json(const IsogenyData& iso);
IsogenyData isogeny_from_json(const Json& j);

// output-only shapes
Json to_json(const DecompositionReport& r);
Json to_json(const BundleBlock& b);
Json to_json(const PushforwardReport& r);
Json to_json(const Classification& c);

}  // namespace hvb

#endif
