// Decode a raw iBeacon advertisement and read the wearer identity packed
// into the minor field.

use ble_hri::ibeacon::{decode_advertisement, encode_advertisement, AdvertisementPayload, Attachment, BeaconIdentity};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let uuid = [
        0xE2, 0xC5, 0x6D, 0xB5, 0xDF, 0xFB, 0x48, 0xD2, 0xB0, 0x60, 0xD0, 0xF5, 0xA7, 0x10, 0x96, 0xE0,
    ];
    let who = BeaconIdentity::new(1, Attachment::Chest)?;
    let payload = AdvertisementPayload::for_identity(uuid, 7, 0x1230, who, -23)?;
    let bytes = encode_advertisement(&payload);

    let hex: Vec<String> = bytes.iter().map(|b| format!("{b:02x}")).collect();
    println!("advertisement: {}", hex.join(" "));

    let decoded = decode_advertisement(&bytes)?;
    println!(
        "major {} minor {:#06x} txPower {} dBm -> {}",
        decoded.major(),
        decoded.minor(),
        decoded.measured_tx_power_dbm(),
        decoded.identity()
    );
    assert_eq!(decoded.identity(), who);

    let mut truncated = bytes.to_vec();
    truncated.truncate(20);
    println!("truncated: {}", decode_advertisement(&truncated).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
