#include "ostore/client_context.hpp"

#include "ostore/errors.hpp"

namespace ostore {

Bytes encode_item(const Item& item) {
  ByteWriter w;
  if (item.filler) {
    w.u8(0);
    return w.take();
  }
  Bytes key = item.key.encode();
  if (key.size() > UINT16_MAX) throw Error(ErrorCode::kPlaintextTooLarge, "logical key too long");
  w.u8(1);
  w.u16(static_cast<std::uint16_t>(key.size()));
  w.raw(key);
  w.u8(item.value ? 1 : 0);
  const Bytes empty;
  const Bytes& v = item.value ? *item.value : empty;
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.raw(v);
  return w.take();
}

Item decode_item(ByteView plaintext) {
  ByteReader r(plaintext);
  if (r.u8() == 0) return Item::make_filler();
  Item item;
  std::uint16_t klen = r.u16();
  item.key = LogicalKey::decode(r.raw(klen));
  bool has_value = r.u8() != 0;
  std::uint32_t vlen = r.u32();
  ByteView v = r.raw(vlen);
  if (has_value) item.value = Bytes(v.begin(), v.end());
  return item;
}

std::size_t item_overhead(const LogicalKey& key) { return 8 + 1 + key.payload.size(); }

StoredKey ClientContext::random_key(std::uint8_t prefix) {
  StoredKey k;
  rng_.fill(k);
  k[0] = prefix;
  return k;
}

StoredKey ClientContext::keyed(std::uint8_t prefix, const Nonce& r, const LogicalKey& k) const {
  StoredKey out = obfuscate_key(keys_.prf_key, r, k);
  out[0] = prefix;
  return out;
}

StoredKey prefix_min(std::uint8_t prefix) {
  StoredKey k{};
  k[0] = prefix;
  return k;
}

StoredKey prefix_max(std::uint8_t prefix) {
  StoredKey k;
  k.fill(0xff);
  k[0] = prefix;
  return k;
}

}  // namespace ostore
