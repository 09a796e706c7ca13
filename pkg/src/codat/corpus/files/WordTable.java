public class WordTable {  
    //OVERVIEW: Keeps track of both interesting and uninteresting words. The uninteresting
    //   words are obtained from a private file.
    //   Records the number of times each interesting word occurs in each document.


    Map map;  //Maps each interesting word w to an ArrayList of all its DocCnt objects.
    //(d,c) in w's ArrayList means that w occurs c times in document d.
    //Maps each uninteresting word to null.

    //REPRESENTATION INVARIANT:
    //   (A w : isInteresting(w) : (d,c) in map.get(w) iff c = sumKey(d,w))



    //CONSTRUCTORS

    public WordTable() throws NotPossibleException, FileNotFoundException {
        //EFFECTS: If the file of uninteresting words cannot be read throws NotPossibleException,
        //   else initializes the Wordtable to contain all the words in
        //   the file as uninteresting words.

        map = new HashMap();

        java.io.File nkfile = new java.io.File("src/uninteresting.txt");  
        //private file containing the uninteresting words
        Scanner input = new Scanner(nkfile);

        //We will map uninteresting words to null instead of to an actual DocCnt object.
        String w;
        while (input.hasNext()) {
            w = input.next();
            map.put(w, null);
        }
    }



    //METHODS

    public boolean isInteresting(String w) {
        //EFFECTS: If w is null or a nonword or an uninteresting word
        //    returns false else returns true
        //HELPS: Engine.queryFirst(w), Engine.queryMore(w)

        if ( (w == null) || (!wordOk(w)) ) return false;
        if ( map.containsKey(w) && map.get(w) == null ) return false;
        return true;  //None of the above, so w is interesting
    }


    public Map addDoc(Doc d) {
        //REQUIRES: d is not null
        //MODIFIES:  this
        //EFFECTS: Adds all of the interesting words of d to this
        //   with a count of their number of occurrences. Also returns
        //   a hashtable (docMap) mapping each interesting word in d to its number of occurrences.
        //HELPS: Engine.addDocs(u)


        //Code sketch:
        //1.    Compute the hashtable docMap and also the set of words in d
        //2.    For each word w in d
        //        construct the DocCnt object dc = (d, docMap(w)) and
        //        insert the pair (w, dc) into this
        //3.    Return docMap



        Map docMap = new HashMap();

        Iterator g = d.words();      //Generator for words in d's body
        Set docSet = new HashSet();  //Set to store all interesting words in d's body,
        //to use later to iterate and insert into this

        String word;    //Used to store an individual word in d's body that is being processed.

        //1.    Compute the hashtable docMap and also the set of words in d (store in docSet)
        while (g.hasNext()) {
            word = (String) g.next();                 //next word of d's body to process
            if (isInteresting(word)) {                //if word is interesting, then

                //update its entry in docMap
                Integer ONE = new Integer(1);
                Integer count = (Integer) docMap.get(word);
                if (count == null) {
                    count = ONE; }
                else {
                    int value = count.intValue();
                    count = new Integer(value + 1);
                }
                docMap.put(word, count);
                docSet.add(word);
            }
        }
        //docMap and docSet have the correct values:
        //   docSet consists of all the interesting words in d, and 
        //   every interesting word in d is mapped by docMap to its //   occurrence count in d,


        //2. For each word w in d, i.e., in docSet
        //        construct the DocCnt object dc = (d, docMap(w)) and
        //        insert the pair (w, dc) into this
        Iterator gs = docSet.iterator();
        while (gs.hasNext()) {             //iterate over words in docSet

            word = (String) gs.next();

            //Construct the DocCnt object dc = (d, docMap(word))
            int c = ((Integer) docMap.get(word)).intValue();
            DocCnt dc = new DocCnt(d, c);

            //Append dc to map(word)
            if (!map.containsKey(word))  {      //word not in map, so map(word) is null
                ArrayList<DocCnt> A = new ArrayList<DocCnt>();  //declare empty arraylist A
                A.add(dc);                      //add dc to A
                map.put(word,A);                //insert (word,A) into map, 
                                                //i.e., into the wordTable
            }
            else {    //word is in map
                ArrayList<DocCnt> A = (ArrayList<DocCnt>) map.get(word);  //get map(word)
                A.add(dc);                    //Append dc to it
                map.put(word,A);              //Put updated ArrayList as new map(word)
            }

        }
        //The value of map is updated correctly

        return docMap;

    }





    public ArrayList lookup(String k) {
        //REQUIRES: k is not null.
        //EFFECTS: Returns an ArrayList of DocCnt objects where the
        //  occurrence count of word k in Doc is Cnt.
        //HELPS: Query.Query(wt, w).

        return (ArrayList) map.get(k);  //WARNING: exposes rep. OK for internal use only.
    }



    public boolean wordOk(String s) {
        //EFFECTS: returns true iff s consists entirely of alphabetic characters.

        for(int i = 0; i < s.length(); i = i+1) {
            char c = s.charAt(i);
            if (!( ('a' <= c && c <= 'z') || ('A' <= c && c <= 'Z') ))  
            //c is not alphabetic so return false immediately
                return false;
        }
        return true;  //All chars in s are alphabetic so return true

    }
}
