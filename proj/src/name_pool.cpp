#include "context_drift/name_pool.hpp"

#include <array>
#include <cctype>
#include <set>

#include "context_drift/errors.hpp"

namespace context_drift {

const std::vector<std::string>& default_name_pool() {
    static const std::vector<std::string> pool = {
        "Aaliyah", "Abel", "Ada", "Adele", "Adrian", "Agnes", "Aidan", "Aisha", "Alba", "Alden",
        "Alec", "Alice", "Alma", "Alonso", "Amara", "Amelia", "Amir", "Ana", "Anders", "Andrea",
        "Angus", "Anika", "Anton", "Arlo", "Arturo", "Astrid", "Aurora", "Axel", "Beatrix", "Benedict",
        "Bianca", "Blair", "Boris", "Bridget", "Bruno", "Calla", "Calvin", "Camila", "Carmen", "Casimir",
        "Cecil", "Celeste", "Chiara", "Clara", "Clement", "Cora", "Cosmo", "Dalia", "Damian", "Dante",
        "Darius", "Delia", "Desmond", "Diego", "Dina", "Dorian", "Dora", "Edgar", "Edith", "Efrain",
        "Elena", "Elias", "Elise", "Elmer", "Eloise", "Emil", "Enzo", "Esme", "Esther", "Ezra",
        "Fabian", "Farah", "Felix", "Fern", "Fiona", "Flora", "Floyd", "Freya", "Gabriel", "Gemma",
        "Gideon", "Gilda", "Greta", "Gustav", "Hana", "Harvey", "Hazel", "Hector", "Heidi", "Helga",
        "Hugo", "Ida", "Igor", "Ilse", "Imogen", "Inez", "Ingrid", "Irene", "Isaac", "Ivan",
        "Ivy", "Jada", "Jasper", "Joel", "Jonas", "Josefa", "Jude", "Juno", "Kai", "Kamal",
        "Karina", "Kasper", "Keira", "Kenji", "Kiara", "Klaus", "Lana", "Lars", "Laszlo", "Leah",
        "Leon", "Lena", "Levi", "Liam", "Lina", "Linus", "Lorenzo", "Lucia", "Ludwig", "Luna",
        "Lyra", "Mabel", "Magnus", "Maia", "Malik", "Marco", "Margot", "Marisol", "Marta", "Mateo",
        "Matilda", "Maxine", "Milo", "Mina", "Mira", "Moira", "Nadia", "Nala", "Nico", "Nika",
        "Nils", "Nina", "Noor", "Nora", "Odette", "Odin", "Olaf", "Olga", "Omar", "Opal",
        "Orla", "Oscar", "Otto", "Paloma", "Pablo", "Petra", "Pia", "Piet", "Priya", "Quentin",
        "Quinn", "Rafael", "Rania", "Raul", "Reza", "Rhea", "Rina", "Rocco", "Rohan", "Rosa",
        "Rowan", "Rufus", "Ruth", "Sabine", "Sadie", "Salma", "Samir", "Saoirse", "Selma", "Serena",
        "Silas", "Sofia", "Soren", "Stella", "Sven", "Talia", "Tariq", "Tess", "Thea", "Tobias",
        "Tomas", "Ulla", "Ursula", "Valeria", "Vera", "Victor", "Viggo", "Vilma", "Viola", "Wanda",
        "Wes", "Willa", "Xavier", "Xenia", "Yara", "Yusuf", "Yvette", "Zara", "Zelda", "Zeno",
        "Zoe", "Zorana", "Alaric", "Anouk", "Bettina", "Caspar", "Dagny", "Eamon", "Elin", "Fenna",
        "Gisela", "Halvard", "Ines", "Jorun", "Kalle", "Liesel", "Maren", "Nell", "Ottilie", "Pernille",
        "Rasmus", "Sigrid", "Tove", "Valdemar", "Wilma", "Yrsa", "Aiko", "Bao", "Chen", "Daiki",
        "Emi", "Hiro", "Jin", "Kaito", "Mei", "Noriko", "Ren", "Sakura", "Taro", "Yuki",
        "Akira", "Amadou", "Chidi", "Ebo", "Folake", "Kofi", "Nia", "Obi", "Sade", "Tunde",
        "Zuri", "Amani", "Baraka", "Imani", "Jabari", "Kwame", "Makena", "Neema", "Pili", "Tendai",
        "Zawadi", "Anand", "Devika", "Ishan", "Kavya", "Meera", "Nikhil", "Rahul", "Sanjay", "Tara",
        "Vikram", "Bogdan", "Dusan", "Jelena", "Milan", "Oksana", "Pavel", "Radek", "Stanko", "Vesna",
        "Zoran", "Aldo", "Beppe", "Carlo", "Dario", "Elio", "Fausto", "Gino", "Ilario", "Loris",
        "Nunzio", "Ansel", "Brisa", "Corin", "Dmitri", "Elva", "Faisal", "Gunnar", "Hilde", "Ismael",
    };
    return pool;
}

std::vector<std::string> extended_name_pool(std::size_t n) {
    std::vector<std::string> pool = default_name_pool();
    std::set<std::string> seen(pool.begin(), pool.end());
    static constexpr std::array<const char*, 16> kOnsets{"B", "D", "F", "G", "H", "J", "K", "L",
                                                         "M", "N", "P", "R", "S", "T", "V", "Z"};
    static constexpr std::array<const char*, 5> kVowels{"a", "e", "i", "o", "u"};
    static constexpr std::array<const char*, 5> kCodas{"", "l", "n", "r", "s"};
    // Onset, vowel, onset, vowel, coda: 32000 names before a third syllable
    // would be needed.
    for (const char* o1 : kOnsets) {
        for (const char* v1 : kVowels) {
            for (const char* o2 : kOnsets) {
                for (const char* v2 : kVowels) {
                    for (const char* c : kCodas) {
                        if (pool.size() >= n) {
                            return pool;
                        }
                        std::string name = std::string(o1) + v1 + static_cast<char>(std::tolower(*o2)) + v2 + c;
                        if (seen.insert(name).second) {
                            pool.push_back(std::move(name));
                        }
                    }
                }
            }
        }
    }
    if (pool.size() < n) {
        throw PoolExhausted("no more than " + std::to_string(pool.size()) + " distinct names are available");
    }
    return pool;
}

}  // namespace context_drift
