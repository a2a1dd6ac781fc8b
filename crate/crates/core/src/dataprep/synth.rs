//! Seeded generator for card transactions with a planted fraud signal.
//!
//! Roughly half the rows are fraud. Fraud rows tend to have larger amounts,
//! merchants far from the cardholder's home and early-morning timestamps; each
//! signal is noisy on its own, so no single column separates the classes.

use chrono::{DateTime, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::RawTransaction;
use crate::error::{Error, Result};

pub const MIN_ROWS: usize = 100;

pub const CATEGORIES: [&str; 14] = [
    "entertainment",
    "food_dining",
    "gas_transport",
    "grocery_net",
    "grocery_pos",
    "health_fitness",
    "home",
    "kids_pets",
    "misc_net",
    "misc_pos",
    "personal_care",
    "shopping_net",
    "shopping_pos",
    "travel",
];

struct City {
    name: &'static str,
    state: &'static str,
    zip: u32,
    lat: f64,
    long: f64,
    pop: u64,
}

const fn city(name: &'static str, state: &'static str, zip: u32, lat: f64, long: f64, pop: u64) -> City {
    City { name, state, zip, lat, long, pop }
}

const CITIES: [City; 20] = [
    city("Albany", "NY", 12207, 42.6526, -73.7562, 97_000),
    city("Austin", "TX", 78701, 30.2672, -97.7431, 961_000),
    city("Billings", "MT", 59101, 45.7833, -108.5007, 117_000),
    city("Boise", "ID", 83702, 43.6150, -116.2023, 235_000),
    city("Charleston", "WV", 25301, 38.3498, -81.6326, 48_000),
    city("Columbus", "OH", 43215, 39.9612, -82.9988, 905_000),
    city("Des Moines", "IA", 50309, 41.5868, -93.6250, 214_000),
    city("Fargo", "ND", 58102, 46.8772, -96.7898, 125_000),
    city("Fresno", "CA", 93721, 36.7378, -119.7871, 542_000),
    city("Hartford", "CT", 6103, 41.7658, -72.6734, 121_000),
    city("Jackson", "MS", 39201, 32.2988, -90.1848, 153_000),
    city("Knoxville", "TN", 37902, 35.9606, -83.9207, 190_000),
    city("Lincoln", "NE", 68508, 40.8136, -96.7026, 291_000),
    city("Madison", "WI", 53703, 43.0731, -89.4012, 269_000),
    city("Mobile", "AL", 36602, 30.6954, -88.0399, 187_000),
    city("Portland", "ME", 4101, 43.6591, -70.2568, 68_000),
    city("Reno", "NV", 89501, 39.5296, -119.8138, 264_000),
    city("Santa Fe", "NM", 87501, 35.6870, -105.9378, 88_000),
    city("Spokane", "WA", 99201, 47.6588, -117.4260, 228_000),
    city("Tulsa", "OK", 74103, 36.1540, -95.9928, 413_000),
];

const FIRST_NAMES: [&str; 12] = [
    "Alex", "Blair", "Casey", "Dana", "Eli", "Frances", "Gale", "Harper", "Jordan", "Kim", "Logan", "Morgan",
];
const LAST_NAMES: [&str; 10] = [
    "Baker", "Carter", "Diaz", "Evans", "Foster", "Garcia", "Hughes", "Ito", "Jensen", "Khan",
];
const STREETS: [&str; 8] = ["Oak", "Maple", "Cedar", "Pine", "Elm", "Lake", "Hill", "Park"];
const JOBS: [&str; 16] = [
    "Accountant",
    "Architect",
    "Chemist",
    "Dentist",
    "Electrician",
    "Engineer",
    "Farmer",
    "Journalist",
    "Lawyer",
    "Librarian",
    "Nurse",
    "Pharmacist",
    "Pilot",
    "Teacher",
    "Translator",
    "Veterinarian",
];
const MERCHANT_WORDS: [&str; 12] = [
    "Apex", "Birch", "Cobalt", "Delta", "Ember", "Fable", "Granite", "Harbor", "Iris", "Juniper", "Kestrel", "Lumen",
];

struct Customer {
    cc_num: String,
    first: &'static str,
    last: &'static str,
    gender: &'static str,
    street: String,
    city: &'static City,
    lat: f64,
    long: f64,
    job: &'static str,
    dob: NaiveDate,
}

struct Merchant {
    name: String,
    category: &'static str,
}

/// First and last second of the generated transaction window (2019–2020, UTC).
const WINDOW_START: i64 = 1_546_300_800;
const WINDOW_DAYS: i64 = 731;

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

fn make_customer(rng: &mut ChaCha8Rng) -> Customer {
    let city = CITIES.choose(rng).expect("non-empty");
    let dob = NaiveDate::from_ymd_opt(1935, 1, 1).unwrap() + chrono::Days::new(rng.random_range(0..24_800));
    Customer {
        cc_num: format!("4{:015}", rng.random_range(0..1_000_000_000_000_000u64)),
        first: FIRST_NAMES.choose(rng).expect("non-empty"),
        last: LAST_NAMES.choose(rng).expect("non-empty"),
        gender: if rng.random_bool(0.5) { "F" } else { "M" },
        street: format!("{} {} St", rng.random_range(1..9999), STREETS.choose(rng).expect("non-empty")),
        city,
        lat: round_to(city.lat + rng.random_range(-0.15..0.15), 4),
        long: round_to(city.long + rng.random_range(-0.15..0.15), 4),
        job: JOBS.choose(rng).expect("non-empty"),
        dob,
    }
}

fn make_merchant(k: usize, rng: &mut ChaCha8Rng) -> Merchant {
    let a = MERCHANT_WORDS.choose(rng).expect("non-empty");
    let b = MERCHANT_WORDS.choose(rng).expect("non-empty");
    Merchant {
        name: format!("{a} {b} {k:03}"),
        category: CATEGORIES.choose(rng).expect("non-empty"),
    }
}

/// `n_rows` transactions, about half fraudulent, fully determined by `seed`.
pub fn generate_synthetic(n_rows: usize, seed: u64) -> Result<Vec<RawTransaction>> {
    if n_rows < MIN_ROWS {
        return Err(Error::InvalidArgument(format!("n_rows must be at least {MIN_ROWS}, got {n_rows}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let customers: Vec<Customer> = (0..(n_rows / 25).clamp(20, 1000)).map(|_| make_customer(&mut rng)).collect();
    let merchants: Vec<Merchant> = (0..(n_rows / 20).clamp(30, 800)).map(|k| make_merchant(k, &mut rng)).collect();

    let legit_amount = LogNormal::new(3.6, 0.8).expect("valid parameters");
    let fraud_amount = LogNormal::new(5.5, 0.7).expect("valid parameters");

    let mut rows = Vec::with_capacity(n_rows);
    for k in 0..n_rows {
        let fraud = rng.random_bool(0.5);
        let cust = customers.choose(&mut rng).expect("non-empty");
        let merch = merchants.choose(&mut rng).expect("non-empty");

        // 15% of fraud uses everyday-sized amounts.
        let amt = if fraud && rng.random_bool(0.85) {
            fraud_amount.sample(&mut rng)
        } else {
            legit_amount.sample(&mut rng)
        };
        // 60% of fraud happens far from home (roughly 110–330 km); the rest is local.
        let (dlat, dlong) = if fraud && rng.random_bool(0.6) {
            let r = rng.random_range(1.0..3.0);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            (r * theta.sin(), r * theta.cos())
        } else {
            (rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))
        };
        // 70% of fraud falls between midnight and 05:00; 8% of legitimate traffic does.
        let night = rng.random_bool(if fraud { 0.7 } else { 0.08 });
        let hour = if night { rng.random_range(0..5) } else { rng.random_range(5..24) };
        let unix_time = WINDOW_START
            + rng.random_range(0..WINDOW_DAYS) * 86_400
            + hour * 3600
            + rng.random_range(0..3600);
        let stamp = DateTime::from_timestamp(unix_time, 0).expect("inside the generation window");

        rows.push(RawTransaction {
            trans_date_trans_time: stamp.format("%Y-%m-%d %H:%M:%S").to_string(),
            cc_num: cust.cc_num.clone(),
            merchant: merch.name.clone(),
            category: merch.category.to_string(),
            amt: round_to(amt, 2),
            first: cust.first.to_string(),
            last: cust.last.to_string(),
            gender: cust.gender.to_string(),
            street: cust.street.clone(),
            city: cust.city.name.to_string(),
            state: cust.city.state.to_string(),
            zip: cust.city.zip,
            lat: cust.lat,
            long: cust.long,
            city_pop: cust.city.pop,
            job: cust.job.to_string(),
            dob: cust.dob,
            trans_num: format!("{seed:x}-{k:08}"),
            unix_time,
            merch_lat: round_to((cust.lat + dlat).clamp(-90.0, 90.0), 6),
            merch_long: round_to(cust.long + dlong, 6),
            is_fraud: u8::from(fraud),
        });
    }
    Ok(rows)
}
